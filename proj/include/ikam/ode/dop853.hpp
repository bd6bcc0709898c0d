#pragma once

// Adaptive explicit Runge-Kutta integration with the Dormand-Prince 8(5,3)
// pair and its seventh-order continuous extension. The tableau and the step
// size controller follow Hairer & Wanner's DOP853.
//
// E. Hairer, S.P. Norsett and G. Wanner, Solving ordinary differential
// equations I. Nonstiff problems, 2nd edition. Springer (1993).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ikam::ode {

template <std::size_t Dim>
using Vec = std::array<double, Dim>;

template <std::size_t Dim>
double norm(const Vec<Dim>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Tolerances and safeguards for one call of integrate_segment.
struct StepControl {
    double rtol = 1e-11;
    double atol = 1e-13;
    /// Euclidean radius beyond which the solution is reported as escaped.
    double escape_radius = 1e8;
    /// First trial step; 0 selects one automatically.
    double initial_step = 0.0;
    /// Upper bound on |h|; 0 means the segment length.
    double max_step = 0.0;
    std::size_t max_steps = 5'000'000;
};

enum class SegmentStatus { reached, escaped };

template <std::size_t Dim>
struct SegmentResult {
    SegmentStatus status = SegmentStatus::reached;
    /// t_to when reached, otherwise the escape time (strictly inside the span).
    double t = 0.0;
    Vec<Dim> state{};
    bool radius_exceeded = false;
    bool step_underflow = false;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
    /// Last accepted step size (signed), reusable as the next initial step.
    double last_step = 0.0;

    bool reached() const { return status == SegmentStatus::reached; }
};

/// Piecewise seventh-order interpolant over the accepted steps of one or
/// more integration calls. Steps are stored in integration order.
template <std::size_t Dim>
class DenseOutput {
public:
    struct Step {
        double t0 = 0.0;
        double h = 0.0;
        std::array<Vec<Dim>, 8> c{};

        double t1() const { return t0 + h; }

        Vec<Dim> eval(double t) const {
            const double s = (t - t0) / h;
            const double s1 = 1.0 - s;
            Vec<Dim> out;
            for (std::size_t i = 0; i < Dim; ++i) {
                const double par = c[4][i] + s * (c[5][i] + s1 * (c[6][i] + s * c[7][i]));
                out[i] = c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * par)));
            }
            return out;
        }
    };

    void push(Step step) { steps_.push_back(std::move(step)); }
    bool empty() const { return steps_.empty(); }
    std::size_t size() const { return steps_.size(); }
    const std::vector<Step>& steps() const { return steps_; }

    double t_begin() const { return steps_.front().t0; }
    double t_end() const { return steps_.back().t1(); }

    bool covers(double t) const {
        if (steps_.empty()) return false;
        const double a = std::min(t_begin(), t_end());
        const double b = std::max(t_begin(), t_end());
        return t >= a && t <= b;
    }

    /// Evaluates at t; t must lie in the covered span.
    Vec<Dim> operator()(double t) const {
        if (!covers(t)) throw std::out_of_range("DenseOutput: time outside covered span");
        const bool forward = t_end() >= t_begin();
        // First step whose far end is at or beyond t in the integration direction.
        auto it = std::lower_bound(steps_.begin(), steps_.end(), t, [forward](const Step& s, double tt) {
            return forward ? s.t1() < tt : s.t1() > tt;
        });
        if (it == steps_.end()) it = std::prev(steps_.end());
        return it->eval(t);
    }

private:
    std::vector<Step> steps_;
};

namespace detail {

// Butcher tableau of DOP853.
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;
inline constexpr double c14 = 0.1e+00;
inline constexpr double c15 = 0.2e+00;
inline constexpr double c16 = 0.777777777777777777777777777778e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double a141 = 5.61675022830479523392909219681e-2;
inline constexpr double a147 = 2.53500210216624811088794765333e-1;
inline constexpr double a148 = -2.46239037470802489917441475441e-1;
inline constexpr double a149 = -1.24191423263816360469010140626e-1;
inline constexpr double a1410 = 1.5329179827876569731206322685e-1;
inline constexpr double a1411 = 8.20105229563468988491666602057e-3;
inline constexpr double a1412 = 7.56789766054569976138603589584e-3;
inline constexpr double a1413 = -8.298e-3;
inline constexpr double a151 = 3.18346481635021405060768473261e-2;
inline constexpr double a156 = 2.83009096723667755288322961402e-2;
inline constexpr double a157 = 5.35419883074385676223797384372e-2;
inline constexpr double a158 = -5.49237485713909884646569340306e-2;
inline constexpr double a1511 = -1.08347328697249322858509316994e-4;
inline constexpr double a1512 = 3.82571090835658412954920192323e-4;
inline constexpr double a1513 = -3.40465008687404560802977114492e-4;
inline constexpr double a1514 = 1.41312443674632500278074618366e-1;
inline constexpr double a161 = -4.28896301583791923408573538692e-1;
inline constexpr double a166 = -4.69762141536116384314449447206e0;
inline constexpr double a167 = 7.68342119606259904184240953878e0;
inline constexpr double a168 = 4.06898981839711007970213554331e0;
inline constexpr double a169 = 3.56727187455281109270669543021e-1;
inline constexpr double a1613 = -1.39902416515901462129418009734e-3;
inline constexpr double a1614 = 2.9475147891527723389556272149e0;
inline constexpr double a1615 = -9.15095847217987001081870187138e0;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;

inline constexpr double d41 = -0.84289382761090128651353491142e+01;
inline constexpr double d46 = 0.56671495351937776962531783590e+00;
inline constexpr double d47 = -0.30689499459498916912797304727e+01;
inline constexpr double d48 = 0.23846676565120698287728149680e+01;
inline constexpr double d49 = 0.21170345824450282767155149946e+01;
inline constexpr double d410 = -0.87139158377797299206789907490e+00;
inline constexpr double d411 = 0.22404374302607882758541771650e+01;
inline constexpr double d412 = 0.63157877876946881815570249290e+00;
inline constexpr double d413 = -0.88990336451333310820698117400e-01;
inline constexpr double d414 = 0.18148505520854727256656404962e+02;
inline constexpr double d415 = -0.91946323924783554000451984436e+01;
inline constexpr double d416 = -0.44360363875948939664310572000e+01;
inline constexpr double d51 = 0.10427508642579134603413151009e+02;
inline constexpr double d56 = 0.24228349177525818288430175319e+03;
inline constexpr double d57 = 0.16520045171727028198505394887e+03;
inline constexpr double d58 = -0.37454675472269020279518312152e+03;
inline constexpr double d59 = -0.22113666853125306036270938578e+02;
inline constexpr double d510 = 0.77334326684722638389603898808e+01;
inline constexpr double d511 = -0.30674084731089398182061213626e+02;
inline constexpr double d512 = -0.93321305264302278729567221706e+01;
inline constexpr double d513 = 0.15697238121770843886131091075e+02;
inline constexpr double d514 = -0.31139403219565177677282850411e+02;
inline constexpr double d515 = -0.93529243588444783865713862664e+01;
inline constexpr double d516 = 0.35816841486394083752465898540e+02;
inline constexpr double d61 = 0.19985053242002433820987653617e+02;
inline constexpr double d66 = -0.38703730874935176555105901742e+03;
inline constexpr double d67 = -0.18917813819516756882830838328e+03;
inline constexpr double d68 = 0.52780815920542364900561016686e+03;
inline constexpr double d69 = -0.11573902539959630126141871134e+02;
inline constexpr double d610 = 0.68812326946963000169666922661e+01;
inline constexpr double d611 = -0.10006050966910838403183860980e+01;
inline constexpr double d612 = 0.77771377980534432092869265740e+00;
inline constexpr double d613 = -0.27782057523535084065932004339e+01;
inline constexpr double d614 = -0.60196695231264120758267380846e+02;
inline constexpr double d615 = 0.84320405506677161018159903784e+02;
inline constexpr double d616 = 0.11992291136182789328035130030e+02;
inline constexpr double d71 = -0.25693933462703749003312586129e+02;
inline constexpr double d76 = -0.15418974869023643374053993627e+03;
inline constexpr double d77 = -0.23152937917604549567536039109e+03;
inline constexpr double d78 = 0.35763911791061412378285349910e+03;
inline constexpr double d79 = 0.93405324183624310003907691704e+02;
inline constexpr double d710 = -0.37458323136451633156875139351e+02;
inline constexpr double d711 = 0.10409964950896230045147246184e+03;
inline constexpr double d712 = 0.29840293426660503123344363579e+02;
inline constexpr double d713 = -0.43533456590011143754432175058e+02;
inline constexpr double d714 = 0.96324553959188282948394950600e+02;
inline constexpr double d715 = -0.39177261675615439165231486172e+02;
inline constexpr double d716 = -0.14972683625798562581422125276e+03;

template <std::size_t Dim>
bool all_finite(const Vec<Dim>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

template <std::size_t Dim, class Field>
double initial_step(const Field& f, double t, const Vec<Dim>& y, const Vec<Dim>& f0, double dir,
                    double hmax, const StepControl& ctl) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
        const double sk = ctl.atol + ctl.rtol * std::abs(y[i]);
        dnf += (f0[i] / sk) * (f0[i] / sk);
        dny += (y[i] / sk) * (y[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax);
    Vec<Dim> y1;
    for (std::size_t i = 0; i < Dim; ++i) y1[i] = y[i] + dir * h * f0[i];
    const Vec<Dim> f1 = f(t + dir * h, y1);
    double der2 = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
        const double sk = ctl.atol + ctl.rtol * std::abs(y[i]);
        const double d = (f1[i] - f0[i]) / sk;
        der2 += d * d;
    }
    der2 = std::isfinite(der2) ? std::sqrt(der2) / h : std::numeric_limits<double>::infinity();
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
    h = std::min({100.0 * std::abs(h), h1, hmax});
    return h;
}

}  // namespace detail

/// Integrates u' = f(t, u) from t_from to t_to, landing exactly on t_to.
///
/// Works in either time direction. Reports escape when the Euclidean norm of
/// the state reaches ctl.escape_radius (the crossing time is located on the
/// continuous extension) or when the step size underflows, which is how a
/// finite-time blow-up shows up. If `dense` is given, the continuous
/// extension of every accepted step is appended to it.
template <std::size_t Dim, class Field>
SegmentResult<Dim> integrate_segment(const Field& f, double t_from, double t_to, const Vec<Dim>& u0,
                                     const StepControl& ctl, DenseOutput<Dim>* dense = nullptr) {
    using namespace detail;
    if (!(ctl.rtol > 0.0) || !(ctl.atol >= 0.0) || !(ctl.rtol + ctl.atol > 0.0))
        throw std::invalid_argument("integrate_segment: tolerances must be positive");
    if (!(ctl.escape_radius > 0.0)) throw std::invalid_argument("integrate_segment: escape radius must be positive");
    if (t_from == t_to) throw std::invalid_argument("integrate_segment: empty time span");

    constexpr double uround = std::numeric_limits<double>::epsilon();
    constexpr double safe = 0.9, fac1 = 0.333, fac2 = 6.0, expo1 = 1.0 / 8.0;
    const double facc1 = 1.0 / fac1, facc2 = 1.0 / fac2;

    SegmentResult<Dim> res;
    const double dir = t_to > t_from ? 1.0 : -1.0;
    const double span = std::abs(t_to - t_from);
    const double hmax = ctl.max_step > 0.0 ? std::min(ctl.max_step, span) : span;

    double t = t_from;
    Vec<Dim> y = u0;
    if (norm(y) >= ctl.escape_radius) {
        res.status = SegmentStatus::escaped;
        res.t = t;
        res.state = y;
        res.radius_exceeded = true;
        return res;
    }

    std::array<Vec<Dim>, 17> k{};  // k[1..16], index 0 unused
    k[1] = f(t, y);
    ++res.evaluations;
    double h = ctl.initial_step != 0.0 ? std::min(std::abs(ctl.initial_step), hmax)
                                       : initial_step<Dim>(f, t, y, k[1], dir, hmax, ctl);
    if (ctl.initial_step == 0.0) ++res.evaluations;
    double facold = 1e-4;
    bool reject = false;
    bool last = false;
    Vec<Dim> yt, ynew, ysum;

    auto stage = [&](double cc, std::initializer_list<std::pair<int, double>> terms, int into, double hs) {
        for (std::size_t i = 0; i < Dim; ++i) {
            double acc = 0.0;
            for (const auto& [idx, a] : terms) acc += a * k[idx][i];
            yt[i] = y[i] + hs * acc;
        }
        k[into] = f(t + cc * hs, yt);
    };

    auto fail_underflow = [&]() {
        res.status = SegmentStatus::escaped;
        res.t = t;
        res.state = y;
        res.step_underflow = true;
        res.radius_exceeded = norm(y) >= ctl.escape_radius;
        return res;
    };

    for (std::size_t nstep = 0;; ++nstep) {
        if (nstep >= ctl.max_steps) return fail_underflow();
        if (0.1 * std::abs(h) <= std::abs(t) * uround || std::abs(h) < 1e-300) return fail_underflow();
        if ((t + 1.01 * dir * h - t_to) * dir > 0.0) {
            h = std::abs(t_to - t);
            last = true;
        }
        const double hs = dir * h;

        stage(c2, {{1, a21}}, 2, hs);
        stage(c3, {{1, a31}, {2, a32}}, 3, hs);
        stage(c4, {{1, a41}, {3, a43}}, 4, hs);
        stage(c5, {{1, a51}, {3, a53}, {4, a54}}, 5, hs);
        stage(c6, {{1, a61}, {4, a64}, {5, a65}}, 6, hs);
        stage(c7, {{1, a71}, {4, a74}, {5, a75}, {6, a76}}, 7, hs);
        stage(c8, {{1, a81}, {4, a84}, {5, a85}, {6, a86}, {7, a87}}, 8, hs);
        stage(c9, {{1, a91}, {4, a94}, {5, a95}, {6, a96}, {7, a97}, {8, a98}}, 9, hs);
        stage(c10, {{1, a101}, {4, a104}, {5, a105}, {6, a106}, {7, a107}, {8, a108}, {9, a109}}, 10, hs);
        stage(c11, {{1, a111}, {4, a114}, {5, a115}, {6, a116}, {7, a117}, {8, a118}, {9, a119}, {10, a1110}}, 11,
              hs);
        stage(1.0,
              {{1, a121}, {4, a124}, {5, a125}, {6, a126}, {7, a127}, {8, a128}, {9, a129}, {10, a1210}, {11, a1211}},
              12, hs);
        res.evaluations += 11;

        double err = 0.0, err2 = 0.0;
        for (std::size_t i = 0; i < Dim; ++i) {
            ysum[i] = b1 * k[1][i] + b6 * k[6][i] + b7 * k[7][i] + b8 * k[8][i] + b9 * k[9][i] + b10 * k[10][i] +
                      b11 * k[11][i] + b12 * k[12][i];
            ynew[i] = y[i] + hs * ysum[i];
            const double sk = ctl.atol + ctl.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double e3 = ysum[i] - bhh1 * k[1][i] - bhh2 * k[9][i] - bhh3 * k[12][i];
            const double e5 = er1 * k[1][i] + er6 * k[6][i] + er7 * k[7][i] + er8 * k[8][i] + er9 * k[9][i] +
                              er10 * k[10][i] + er11 * k[11][i] + er12 * k[12][i];
            err2 += (e3 / sk) * (e3 / sk);
            err += (e5 / sk) * (e5 / sk);
        }
        double deno = err + 0.01 * err2;
        if (deno <= 0.0) deno = 1.0;
        err = std::abs(h) * err * std::sqrt(1.0 / (static_cast<double>(Dim) * deno));
        if (!std::isfinite(err) || !all_finite<Dim>(ynew)) err = std::numeric_limits<double>::infinity();

        const double fac11 = std::pow(err, expo1);
        double fac = fac11 / std::pow(facold, 0.0);
        fac = std::max(facc2, std::min(facc1, fac / safe));
        double hnew = h / fac;

        if (err > 1.0) {
            hnew = h / std::min(facc1, fac11 / safe);
            if (!std::isfinite(hnew) || hnew >= h) hnew = h * fac1;
            reject = true;
            last = false;
            ++res.rejected;
            h = hnew;
            continue;
        }

        // accepted
        facold = std::max(err, 1e-4);
        ++res.accepted;
        k[13] = f(t + hs, ynew);
        ++res.evaluations;

        const bool crossed = norm(ynew) >= ctl.escape_radius;
        if (dense || crossed) {
            typename DenseOutput<Dim>::Step st;
            st.t0 = t;
            st.h = hs;
            for (std::size_t i = 0; i < Dim; ++i) {
                const double ydiff = ynew[i] - y[i];
                const double bspl = hs * k[1][i] - ydiff;
                st.c[0][i] = y[i];
                st.c[1][i] = ydiff;
                st.c[2][i] = bspl;
                st.c[3][i] = ydiff - hs * k[13][i] - bspl;
                st.c[4][i] = d41 * k[1][i] + d46 * k[6][i] + d47 * k[7][i] + d48 * k[8][i] + d49 * k[9][i] +
                             d410 * k[10][i] + d411 * k[11][i] + d412 * k[12][i];
                st.c[5][i] = d51 * k[1][i] + d56 * k[6][i] + d57 * k[7][i] + d58 * k[8][i] + d59 * k[9][i] +
                             d510 * k[10][i] + d511 * k[11][i] + d512 * k[12][i];
                st.c[6][i] = d61 * k[1][i] + d66 * k[6][i] + d67 * k[7][i] + d68 * k[8][i] + d69 * k[9][i] +
                             d610 * k[10][i] + d611 * k[11][i] + d612 * k[12][i];
                st.c[7][i] = d71 * k[1][i] + d76 * k[6][i] + d77 * k[7][i] + d78 * k[8][i] + d79 * k[9][i] +
                             d710 * k[10][i] + d711 * k[11][i] + d712 * k[12][i];
            }
            stage(c14, {{1, a141}, {7, a147}, {8, a148}, {9, a149}, {10, a1410}, {11, a1411}, {12, a1412}, {13, a1413}},
                  14, hs);
            stage(c15, {{1, a151}, {6, a156}, {7, a157}, {8, a158}, {11, a1511}, {12, a1512}, {13, a1513}, {14, a1514}},
                  15, hs);
            stage(c16, {{1, a161}, {6, a166}, {7, a167}, {8, a168}, {9, a169}, {13, a1613}, {14, a1614}, {15, a1615}},
                  16, hs);
            res.evaluations += 3;
            for (std::size_t i = 0; i < Dim; ++i) {
                st.c[4][i] = hs * (st.c[4][i] + d413 * k[13][i] + d414 * k[14][i] + d415 * k[15][i] + d416 * k[16][i]);
                st.c[5][i] = hs * (st.c[5][i] + d513 * k[13][i] + d514 * k[14][i] + d515 * k[15][i] + d516 * k[16][i]);
                st.c[6][i] = hs * (st.c[6][i] + d613 * k[13][i] + d614 * k[14][i] + d615 * k[15][i] + d616 * k[16][i]);
                st.c[7][i] = hs * (st.c[7][i] + d713 * k[13][i] + d714 * k[14][i] + d715 * k[15][i] + d716 * k[16][i]);
            }

            if (crossed) {
                // Locate |u| = R inside the step by bisection on the interpolant.
                double lo = 0.0, hi = 1.0;
                for (int it = 0; it < 200 && hi - lo > 4.0 * uround; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (norm(st.eval(t + mid * hs)) >= ctl.escape_radius)
                        hi = mid;
                    else
                        lo = mid;
                }
                if (hi >= 1.0) hi = 1.0 - 4.0 * uround;
                const double t_star = t + hi * hs;
                res.status = SegmentStatus::escaped;
                res.t = t_star;
                res.state = st.eval(t_star);
                if (dense) dense->push(std::move(st));
                res.radius_exceeded = true;
                res.last_step = hs;
                return res;
            }
            dense->push(std::move(st));
        }

        k[1] = k[13];
        y = ynew;
        res.last_step = hs;
        if (last) {
            res.status = SegmentStatus::reached;
            res.t = t_to;
            res.state = y;
            return res;
        }
        t += hs;
        if (std::abs(hnew) > hmax) hnew = hmax;
        if (reject) hnew = std::min(std::abs(hnew), h);
        reject = false;
        h = hnew;
    }
}

}  // namespace ikam::ode
