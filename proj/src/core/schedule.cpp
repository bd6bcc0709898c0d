#include "ikam/core/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ikam::core {

ImpulseSchedule::ImpulseSchedule(std::vector<double> base_times, double period)
    : base_(std::move(base_times)), period_(period) {
    if (!(period_ > 0.0) || !std::isfinite(period_)) throw std::invalid_argument("ImpulseSchedule: period must be positive");
    for (std::size_t i = 0; i < base_.size(); ++i) {
        if (!std::isfinite(base_[i]) || base_[i] < 0.0 || base_[i] >= period_)
            throw std::invalid_argument("ImpulseSchedule: base time " + std::to_string(i) + " outside [0, period)");
        if (i > 0 && !(base_[i] > base_[i - 1]))
            throw std::invalid_argument("ImpulseSchedule: base times must be strictly increasing");
    }
}

namespace {
long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
}  // namespace

double ImpulseSchedule::time(long j) const {
    const long kk = static_cast<long>(k());
    const long m = floor_div(j, kk);
    const long r = j - m * kk;
    return base_[static_cast<std::size_t>(r)] + static_cast<double>(m) * period_;
}

std::size_t ImpulseSchedule::slot(long j) const {
    const long kk = static_cast<long>(k());
    const long m = floor_div(j, kk);
    return static_cast<std::size_t>(j - m * kk);
}

std::optional<long> ImpulseSchedule::next_after(double t) const {
    if (empty()) return std::nullopt;
    const long kk = static_cast<long>(k());
    long j = (static_cast<long>(std::floor(t / period_)) - 1) * kk;
    while (time(j) <= t) ++j;
    // step back over any index that is still above t
    while (time(j - 1) > t) --j;
    return j;
}

std::optional<long> ImpulseSchedule::last_before(double t) const {
    if (empty()) return std::nullopt;
    const long kk = static_cast<long>(k());
    long j = (static_cast<long>(std::floor(t / period_)) + 1) * kk;
    while (time(j) >= t) --j;
    while (time(j + 1) < t) ++j;
    return j;
}

std::optional<long> ImpulseSchedule::index_at(double t) const {
    if (empty()) return std::nullopt;
    const auto j = next_after(t);
    const long cand = *j - 1;
    if (time(cand) == t) return cand;
    return std::nullopt;
}

bool ImpulseSchedule::satisfies_unit_period_ordering() const {
    if (period_ != 1.0) return false;
    for (std::size_t i = 0; i < base_.size(); ++i) {
        if (!(base_[i] > 0.0 && base_[i] < 1.0)) return false;
        if (i > 0 && !(base_[i] > base_[i - 1])) return false;
    }
    return true;
}

}  // namespace ikam::core
