#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <vector>

namespace ikam::chart {

using Point = std::array<double, 2>;

struct ActionAngle {
    double lambda = 1.0;
    double theta = 0.0;  // in [0, 1)
};

/// Tabulated reference solution (X0, Y0) of X'' + X^{2n+1} = 0 from (1, 0)
/// over one minimal period T0, with the action-angle chart
///   X = (c lambda)^alpha X0(theta T0),  Y = (c lambda)^beta Y0(theta T0),
/// alpha = 1/(n+2), beta = (n+1)/(n+2), c = 1/(alpha T0).
class ReferenceChart {
public:
    /// Builds a chart from a node table X[i], Y[i] at s_i = i T0 / nodes,
    /// i = 0..nodes. `nodes` must be a positive multiple of 4.
    ReferenceChart(int n, double tol, double T0_quadrature, double T0_return, std::vector<double> X,
                   std::vector<double> Y);

    int n() const { return n_; }
    double tol() const { return tol_; }
    double T0() const { return T0_; }
    double T0_quadrature() const { return T0_; }
    double T0_return() const { return T0_return_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double c() const { return c_; }
    double d() const { return d_; }
    std::size_t nodes() const { return X_.size() - 1; }
    const std::vector<double>& X_nodes() const { return X_; }
    const std::vector<double>& Y_nodes() const { return Y_; }

    /// Interpolated reference solution, T0-periodic in s.
    Point XY0(double s) const;
    /// Derivative of the interpolant in s.
    Point XY0_prime(double s) const;
    double X0(double s) const { return XY0(s)[0]; }
    double Y0(double s) const { return XY0(s)[1]; }

    /// s in [0, T0/4] with X0(s) = X, for X in [0, 1] (monotone cubic).
    double quarter_inverse(double X) const;

    /// max over nodes of |(n+1) Y^2 + X^{2n+2} - 1|.
    double energy_residual() const;

    Point from_action_angle(const ActionAngle& p) const;
    /// Throws std::invalid_argument at the origin.
    ActionAngle to_action_angle(const Point& s) const;

private:
    struct Interp;

    int n_;
    double tol_;
    double T0_;
    double T0_return_;
    double alpha_, beta_, c_, d_;
    std::vector<double> X_, Y_;
    std::shared_ptr<const Interp> interp_;
};

/// T0 / 4 = sqrt(n+1) int_0^1 (1 - X^{2n+2})^{-1/2} dX by adaptive
/// Gauss-Kronrod quadrature after the substitution X = 1 - v^2.
double quarter_period(int n, double tol);

/// First return time of the orbit from (1, 0) to the positive X axis,
/// located on the continuous extension of a tight-tolerance integration.
double return_time(int n, double T0_guess);

/// Computes T0 both ways, cross-checks them within tol and tabulates one
/// period at `nodes` equally spaced points. Throws std::runtime_error on
/// disagreement.
ReferenceChart compute_reference(int n, double tol = 1e-10, std::size_t nodes = 4096);

/// Text cache of a chart; see docs/formats.md.
void save_chart(const ReferenceChart& chart, const std::filesystem::path& path);
ReferenceChart load_chart(const std::filesystem::path& path);
std::filesystem::path chart_cache_path(const std::filesystem::path& dir, int n, double tol);
/// Loads the cached chart for (n, tol) from dir, computing and storing it
/// when absent or unreadable.
ReferenceChart cached_reference(const std::filesystem::path& dir, int n, double tol = 1e-10);

}  // namespace ikam::chart
