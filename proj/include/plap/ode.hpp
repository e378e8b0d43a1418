#pragma once

// Explicit Runge-Kutta 8(5,3) of Dormand and Prince (DOP853) with the
// 7th-order continuous extension, after Hairer, Norsett and Wanner.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "plap/errors.hpp"

namespace plap {

template <std::size_t Dim>
using Vec = std::array<double, Dim>;

namespace dop853 {
constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;
constexpr double c14 = 0.1e+00;
constexpr double c15 = 0.2e+00;
constexpr double c16 = 0.777777777777777777777777777778e+00;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;
constexpr double a141 = 5.61675022830479523392909219681e-2;
constexpr double a147 = 2.53500210216624811088794765333e-1;
constexpr double a148 = -2.46239037470802489917441475441e-1;
constexpr double a149 = -1.24191423263816360469010140626e-1;
constexpr double a1410 = 1.5329179827876569731206322685e-1;
constexpr double a1411 = 8.20105229563468988491666602057e-3;
constexpr double a1412 = 7.56789766054569976138603589584e-3;
constexpr double a1413 = -8.298e-3;
constexpr double a151 = 3.18346481635021405060768473261e-2;
constexpr double a156 = 2.83009096723667755288322961402e-2;
constexpr double a157 = 5.35419883074385676223797384372e-2;
constexpr double a158 = -5.49237485713909884646569340306e-2;
constexpr double a1511 = -1.08347328697249322858509316994e-4;
constexpr double a1512 = 3.82571090835658412954920192323e-4;
constexpr double a1513 = -3.40465008687404560802977114492e-4;
constexpr double a1514 = 1.41312443674632500278074618366e-1;
constexpr double a161 = -4.28896301583791923408573538692e-1;
constexpr double a166 = -4.69762141536116384314449447206e0;
constexpr double a167 = 7.68342119606259904184240953878e0;
constexpr double a168 = 4.06898981839711007970213554331e0;
constexpr double a169 = 3.56727187455281109270669543021e-1;
constexpr double a1613 = -1.39902416515901462129418009734e-3;
constexpr double a1614 = 2.9475147891527723389556272149e0;
constexpr double a1615 = -9.15095847217987001081870187138e0;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double e31 = 0.244094488188976377952755905512e+00;
constexpr double e32 = 0.733846688281611857341361741547e+00;
constexpr double e33 = 0.220588235294117647058823529412e-01;

constexpr double e51 = 0.1312004499419488073250102996e-01;
constexpr double e56 = -0.1225156446376204440720569753e+01;
constexpr double e57 = -0.4957589496572501915214079952e+00;
constexpr double e58 = 0.1664377182454986536961530415e+01;
constexpr double e59 = -0.3503288487499736816886487290e+00;
constexpr double e510 = 0.3341791187130174790297318841e+00;
constexpr double e511 = 0.8192320648511571246570742613e-01;
constexpr double e512 = -0.2235530786388629525884427845e-01;

constexpr double d41 = -0.84289382761090128651353491142e+01;
constexpr double d46 = 0.56671495351937776962531783590e+00;
constexpr double d47 = -0.30689499459498916912797304727e+01;
constexpr double d48 = 0.23846676565120698287728149680e+01;
constexpr double d49 = 0.21170345824450282767155149946e+01;
constexpr double d410 = -0.87139158377797299206789907490e+00;
constexpr double d411 = 0.22404374302607882758541771650e+01;
constexpr double d412 = 0.63157877876946881815570249290e+00;
constexpr double d413 = -0.88990336451333310820698117400e-01;
constexpr double d414 = 0.18148505520854727256656404962e+02;
constexpr double d415 = -0.91946323924783554000451984436e+01;
constexpr double d416 = -0.44360363875948939664310572000e+01;
constexpr double d51 = 0.10427508642579134603413151009e+02;
constexpr double d56 = 0.24228349177525818288430175319e+03;
constexpr double d57 = 0.16520045171727028198505394887e+03;
constexpr double d58 = -0.37454675472269020279518312152e+03;
constexpr double d59 = -0.22113666853125306036270938578e+02;
constexpr double d510 = 0.77334326684722638389603898808e+01;
constexpr double d511 = -0.30674084731089398182061213626e+02;
constexpr double d512 = -0.93321305264302278729567221706e+01;
constexpr double d513 = 0.15697238121770843886131091075e+02;
constexpr double d514 = -0.31139403219565177677282850411e+02;
constexpr double d515 = -0.93529243588444783865713862664e+01;
constexpr double d516 = 0.35816841486394083752465898540e+02;
constexpr double d61 = 0.19985053242002433820987653617e+02;
constexpr double d66 = -0.38703730874935176555105901742e+03;
constexpr double d67 = -0.18917813819516756882830838328e+03;
constexpr double d68 = 0.52780815920542364900561016686e+03;
constexpr double d69 = -0.11573902539959630126141871134e+02;
constexpr double d610 = 0.68812326946963000169666922661e+01;
constexpr double d611 = -0.10006050966910838403183860980e+01;
constexpr double d612 = 0.77771377980534432092869265740e+00;
constexpr double d613 = -0.27782057523535084065932004339e+01;
constexpr double d614 = -0.60196695231264120758267380846e+02;
constexpr double d615 = 0.84320405506677161018159903784e+02;
constexpr double d616 = 0.11992291136182789328035130030e+02;
constexpr double d71 = -0.25693933462703749003312586129e+02;
constexpr double d76 = -0.15418974869023643374053993627e+03;
constexpr double d77 = -0.23152937917604549567536039109e+03;
constexpr double d78 = 0.35763911791061412378285349910e+03;
constexpr double d79 = 0.93405324183624310003907691704e+02;
constexpr double d710 = -0.37458323136451633156875139351e+02;
constexpr double d711 = 0.10409964950896230045147246184e+03;
constexpr double d712 = 0.29840293426660503123344363579e+02;
constexpr double d713 = -0.43533456590011143754432175058e+02;
constexpr double d714 = 0.96324553959188282948394950600e+02;
constexpr double d715 = -0.39177261675615439165231486172e+02;
constexpr double d716 = -0.14972683625798562581422125276e+03;
}  // namespace dop853

// Continuous extension of one accepted step on [t0, t0 + h].
template <std::size_t Dim>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<Vec<Dim>, 8> r{};

  double t1() const { return t0 + h; }

  double component(std::size_t i, double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    const auto& c = r;
    const double tail = c[4][i] + s * (c[5][i] + s1 * (c[6][i] + s * c[7][i]));
    return c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * tail)));
  }

  Vec<Dim> operator()(double t) const {
    Vec<Dim> y;
    for (std::size_t i = 0; i < Dim; ++i) y[i] = component(i, t);
    return y;
  }
};

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  // 0 selects the step automatically
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 20'000'000;
  // false skips the three extra stages; the continuous extension then
  // degrades to the cubic Hermite interpolant of the step
  bool dense = true;
};

template <std::size_t Dim>
struct IntegrationResult {
  double t = 0.0;
  Vec<Dim> y{};
  bool stopped = false;  // observer asked to stop
  long accepted = 0;
  long rejected = 0;
};

// Rhs: void(double t, const Vec<Dim>& y, Vec<Dim>& dydt).
template <std::size_t Dim, class Rhs>
class Dop853 {
 public:
  Dop853(Rhs rhs, StepControl ctl) : rhs_(std::move(rhs)), ctl_(ctl) { weight_.fill(1.0); }

  // Absolute tolerance for component i becomes atol * weight[i]. With
  // running_max the weight is raised to the largest |y_i| seen so far.
  void set_abs_weight(const Vec<Dim>& weight, bool running_max) {
    weight_ = weight;
    running_max_ = running_max;
  }

  // observer(const DenseStep<Dim>&, const Vec<Dim>& y1) -> bool, false stops.
  template <class Observer>
  IntegrationResult<Dim> integrate(double t0, Vec<Dim> y, double tend, Observer&& observer) {
    using namespace dop853;
    IntegrationResult<Dim> res;
    res.t = t0;
    res.y = y;
    if (t0 == tend) return res;
    const double dir = tend > t0 ? 1.0 : -1.0;
    Vec<Dim> w = weight_;
    auto scale = [&](std::size_t i, double a, double b) {
      if (running_max_) w[i] = std::max(w[i], std::max(std::fabs(a), std::fabs(b)));
      return ctl_.atol * w[i] + ctl_.rtol * std::max(std::fabs(a), std::fabs(b));
    };

    double t = t0;
    Vec<Dim> k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, k13, k14, k15, k16, yt, ynew;
    rhs_(t, y, k1);
    double h = ctl_.h_init > 0 ? ctl_.h_init : initial_step(t, y, k1, dir, tend, scale);
    h = std::min({h, ctl_.h_max, std::fabs(tend - t0)});
    double facold = 1e-4;
    bool last_rejected = false;
    long nsteps = 0;

    while (true) {
      if (++nsteps > ctl_.max_steps) {
        throw NumericError("step budget exhausted", t, std::vector<double>(y.begin(), y.end()));
      }
      const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(t), 1e-290);
      if (h < hmin || !std::isfinite(h)) {
        throw NumericError("step size underflow", t, std::vector<double>(y.begin(), y.end()));
      }
      bool last = false;
      if ((t + dir * h - tend) * dir >= 0.0 || std::fabs(tend - (t + dir * h)) < hmin) {
        h = std::fabs(tend - t);
        last = true;
      }
      const double hs = dir * h;

      for (std::size_t i = 0; i < Dim; ++i) yt[i] = y[i] + hs * a21 * k1[i];
      rhs_(t + c2 * hs, yt, k2);
      for (std::size_t i = 0; i < Dim; ++i) yt[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
      rhs_(t + c3 * hs, yt, k3);
      for (std::size_t i = 0; i < Dim; ++i) yt[i] = y[i] + hs * (a41 * k1[i] + a43 * k3[i]);
      rhs_(t + c4 * hs, yt, k4);
      for (std::size_t i = 0; i < Dim; ++i) yt[i] = y[i] + hs * (a51 * k1[i] + a53 * k3[i] + a54 * k4[i]);
      rhs_(t + c5 * hs, yt, k5);
      for (std::size_t i = 0; i < Dim; ++i) yt[i] = y[i] + hs * (a61 * k1[i] + a64 * k4[i] + a65 * k5[i]);
      rhs_(t + c6 * hs, yt, k6);
      for (std::size_t i = 0; i < Dim; ++i)
        yt[i] = y[i] + hs * (a71 * k1[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      rhs_(t + c7 * hs, yt, k7);
      for (std::size_t i = 0; i < Dim; ++i)
        yt[i] = y[i] + hs * (a81 * k1[i] + a84 * k4[i] + a85 * k5[i] + a86 * k6[i] + a87 * k7[i]);
      rhs_(t + c8 * hs, yt, k8);
      for (std::size_t i = 0; i < Dim; ++i)
        yt[i] = y[i] + hs * (a91 * k1[i] + a94 * k4[i] + a95 * k5[i] + a96 * k6[i] + a97 * k7[i] + a98 * k8[i]);
      rhs_(t + c9 * hs, yt, k9);
      for (std::size_t i = 0; i < Dim; ++i)
        yt[i] = y[i] + hs * (a101 * k1[i] + a104 * k4[i] + a105 * k5[i] + a106 * k6[i] + a107 * k7[i] +
                             a108 * k8[i] + a109 * k9[i]);
      rhs_(t + c10 * hs, yt, k10);
      for (std::size_t i = 0; i < Dim; ++i)
        yt[i] = y[i] + hs * (a111 * k1[i] + a114 * k4[i] + a115 * k5[i] + a116 * k6[i] + a117 * k7[i] +
                             a118 * k8[i] + a119 * k9[i] + a1110 * k10[i]);
      rhs_(t + c11 * hs, yt, k11);
      for (std::size_t i = 0; i < Dim; ++i)
        yt[i] = y[i] + hs * (a121 * k1[i] + a124 * k4[i] + a125 * k5[i] + a126 * k6[i] + a127 * k7[i] +
                             a128 * k8[i] + a129 * k9[i] + a1210 * k10[i] + a1211 * k11[i]);
      rhs_(t + hs, yt, k12);
      Vec<Dim> incr;
      for (std::size_t i = 0; i < Dim; ++i) {
        incr[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] + b11 * k11[i] +
                  b12 * k12[i];
        ynew[i] = y[i] + hs * incr[i];
      }

      double err5 = 0.0, err3 = 0.0;
      bool finite = true;
      for (std::size_t i = 0; i < Dim; ++i) {
        if (!std::isfinite(ynew[i])) finite = false;
        const double sk = std::max(scale(i, y[i], ynew[i]), 1e-300);
        const double e3 = incr[i] - e31 * k1[i] - e32 * k9[i] - e33 * k12[i];
        const double e5 = e51 * k1[i] + e56 * k6[i] + e57 * k7[i] + e58 * k8[i] + e59 * k9[i] + e510 * k10[i] +
                          e511 * k11[i] + e512 * k12[i];
        err3 += (e3 / sk) * (e3 / sk);
        err5 += (e5 / sk) * (e5 / sk);
      }
      double err = 0.0;
      if (!finite) {
        err = 1e10;
      } else {
        double deno = err5 + 0.01 * err3;
        if (deno <= 0.0) deno = 1.0;
        err = h * err5 * std::sqrt(1.0 / (static_cast<double>(Dim) * deno));
      }
      if (!std::isfinite(err)) err = 1e10;

      const double fac11 = std::pow(err, 0.125);
      double fac = fac11 / std::pow(facold, 0.0);
      fac = std::clamp(fac / 0.9, 1.0 / 6.0, 1.0 / 0.333);
      double hnew = h / fac;

      if (err <= 1.0) {
        facold = std::max(err, 1e-4);
        rhs_(t + hs, ynew, k13);
        // continuous extension
        DenseStep<Dim> ds;
        ds.t0 = t;
        ds.h = hs;
        for (std::size_t i = 0; i < Dim; ++i) {
          const double ydiff = ynew[i] - y[i];
          const double bspl = hs * k1[i] - ydiff;
          ds.r[0][i] = y[i];
          ds.r[1][i] = ydiff;
          ds.r[2][i] = bspl;
          ds.r[3][i] = ydiff - hs * k13[i] - bspl;
          ds.r[4][i] = d41 * k1[i] + d46 * k6[i] + d47 * k7[i] + d48 * k8[i] + d49 * k9[i] + d410 * k10[i] +
                       d411 * k11[i] + d412 * k12[i];
          ds.r[5][i] = d51 * k1[i] + d56 * k6[i] + d57 * k7[i] + d58 * k8[i] + d59 * k9[i] + d510 * k10[i] +
                       d511 * k11[i] + d512 * k12[i];
          ds.r[6][i] = d61 * k1[i] + d66 * k6[i] + d67 * k7[i] + d68 * k8[i] + d69 * k9[i] + d610 * k10[i] +
                       d611 * k11[i] + d612 * k12[i];
          ds.r[7][i] = d71 * k1[i] + d76 * k6[i] + d77 * k7[i] + d78 * k8[i] + d79 * k9[i] + d710 * k10[i] +
                       d711 * k11[i] + d712 * k12[i];
        }
        if (ctl_.dense) {
          for (std::size_t i = 0; i < Dim; ++i)
            yt[i] = y[i] + hs * (a141 * k1[i] + a147 * k7[i] + a148 * k8[i] + a149 * k9[i] + a1410 * k10[i] +
                                 a1411 * k11[i] + a1412 * k12[i] + a1413 * k13[i]);
          rhs_(t + c14 * hs, yt, k14);
          for (std::size_t i = 0; i < Dim; ++i)
            yt[i] = y[i] + hs * (a151 * k1[i] + a156 * k6[i] + a157 * k7[i] + a158 * k8[i] + a1511 * k11[i] +
                                 a1512 * k12[i] + a1513 * k13[i] + a1514 * k14[i]);
          rhs_(t + c15 * hs, yt, k15);
          for (std::size_t i = 0; i < Dim; ++i)
            yt[i] = y[i] + hs * (a161 * k1[i] + a166 * k6[i] + a167 * k7[i] + a168 * k8[i] + a169 * k9[i] +
                                 a1613 * k13[i] + a1614 * k14[i] + a1615 * k15[i]);
          rhs_(t + c16 * hs, yt, k16);
          for (std::size_t i = 0; i < Dim; ++i) {
            ds.r[4][i] = hs * (ds.r[4][i] + d413 * k13[i] + d414 * k14[i] + d415 * k15[i] + d416 * k16[i]);
            ds.r[5][i] = hs * (ds.r[5][i] + d513 * k13[i] + d514 * k14[i] + d515 * k15[i] + d516 * k16[i]);
            ds.r[6][i] = hs * (ds.r[6][i] + d613 * k13[i] + d614 * k14[i] + d615 * k15[i] + d616 * k16[i]);
            ds.r[7][i] = hs * (ds.r[7][i] + d713 * k13[i] + d714 * k14[i] + d715 * k15[i] + d716 * k16[i]);
          }
        } else {
          for (int j = 4; j < 8; ++j) ds.r[j].fill(0.0);
        }

        k1 = k13;
        y = ynew;
        t = last ? tend : t + hs;
        ++res.accepted;
        const bool go_on = observer(static_cast<const DenseStep<Dim>&>(ds), static_cast<const Vec<Dim>&>(y));
        res.t = t;
        res.y = y;
        if (!go_on) {
          res.stopped = true;
          return res;
        }
        if (last) return res;
        if (std::fabs(hnew) > ctl_.h_max) hnew = ctl_.h_max;
        if (last_rejected) hnew = std::min(hnew, h);
        last_rejected = false;
      } else {
        hnew = h / std::min(1.0 / 0.333, fac11 / 0.9);
        last_rejected = true;
        ++res.rejected;
      }
      h = hnew;
    }
  }

 private:
  template <class Scale>
  double initial_step(double t, const Vec<Dim>& y, const Vec<Dim>& f0, double dir, double tend, Scale& scale) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
      const double sk = std::max(scale(i, y[i], y[i]), 1e-300);
      dnf += (f0[i] / sk) * (f0[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min({h, ctl_.h_max, std::fabs(tend - t)});
    Vec<Dim> y1, f1;
    for (std::size_t i = 0; i < Dim; ++i) y1[i] = y[i] + dir * h * f0[i];
    rhs_(t + dir * h, y1, f1);
    double der2 = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
      const double sk = std::max(scale(i, y[i], y[i]), 1e-300);
      der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::fabs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
    h = std::min({100.0 * h, h1, ctl_.h_max, std::fabs(tend - t)});
    if (!std::isfinite(h) || h <= 0.0) h = 1e-6 * std::max(1.0, std::fabs(tend - t));
    return h;
  }

  Rhs rhs_;
  StepControl ctl_;
  Vec<Dim> weight_;
  bool running_max_ = false;
};

template <std::size_t Dim, class Rhs>
Dop853<Dim, Rhs> make_dop853(Rhs rhs, StepControl ctl) {
  return Dop853<Dim, Rhs>(std::move(rhs), ctl);
}

// Root of g on [a, b] with g(a), g(b) of opposite sign (or zero), by
// Illinois-modified regula falsi. Returns the smallest-bracket abscissa.
template <class G>
double find_root(G&& g, double a, double b, double ga, double gb, double xtol, int max_iter = 200) {
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  int side = 0;
  for (int it = 0; it < max_iter && std::fabs(b - a) > xtol; ++it) {
    double c = (a * gb - b * ga) / (gb - ga);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    const double gc = g(c);
    if (gc == 0.0) return c;
    if ((gc > 0) == (gb > 0)) {
      b = c;
      gb = gc;
      if (side == -1) ga *= 0.5;
      side = -1;
    } else {
      a = c;
      ga = gc;
      if (side == 1) gb *= 0.5;
      side = 1;
    }
  }
  // keep the end with g on the side of the original left end
  return std::fabs(ga) < std::fabs(gb) ? a : b;
}

}  // namespace plap
