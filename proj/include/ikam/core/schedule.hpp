#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace ikam::core {

/// Periodic sequence of impulse times.
///
/// The base times t_0 < ... < t_{k-1} lie in [0, period); the impulse with
/// integer index j = m*k + r occurs at base_times[r] + m*period, so
/// t_{j+k} = t_j + period. Jump maps are indexed by the slot r.
class ImpulseSchedule {
public:
    ImpulseSchedule() = default;
    explicit ImpulseSchedule(std::vector<double> base_times, double period = 1.0);

    std::size_t k() const { return base_.size(); }
    bool empty() const { return base_.empty(); }
    double period() const { return period_; }
    const std::vector<double>& base_times() const { return base_; }

    double time(long j) const;
    std::size_t slot(long j) const;

    /// Smallest index whose time is strictly greater than t.
    std::optional<long> next_after(double t) const;
    /// Largest index whose time is strictly less than t.
    std::optional<long> last_before(double t) const;
    /// Index of the impulse occurring exactly at t, if any.
    std::optional<long> index_at(double t) const;

    /// Unit period with every base time strictly inside (0, 1).
    bool satisfies_unit_period_ordering() const;

private:
    std::vector<double> base_;
    double period_ = 1.0;
};

}  // namespace ikam::core
