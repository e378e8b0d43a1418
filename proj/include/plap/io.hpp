#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/eigen.hpp"
#include "plap/multiplicity.hpp"
#include "plap/shooter.hpp"

namespace plap {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 17 significant digits, scientific.
inline std::string fmt_sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

namespace detail {

inline void csv_row(std::ostream& os, std::initializer_list<double> xs) {
  bool first = true;
  for (double x : xs) {
    if (!first) os << ',';
    os << fmt_sci(x);
    first = false;
  }
  os << '\n';
}

}  // namespace detail

// Writes through a temporary stream and reports the path on failure.
inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream buf;
  body(buf);
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::string s = buf.str();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  f.close();
  if (!f) throw IoError("write failed: " + path.string());
}

// r,u,uprime,v,H,rho,theta at the accepted steps.
inline void trajectory_csv(const Problem& pb, const Trajectory& tr, std::ostream& os) {
  os << "r,u,uprime,v,H,rho,theta\n";
  for (const auto& s : tr.samples) {
    const double H = tr.constant ? 0.0 : energy(pb, s.r, s.e, s.v);
    detail::csv_row(os, {s.r, s.u(), tr.uprime_from(s.r, s.v), s.v, H, s.rho, s.theta});
  }
}

inline void eigen_csv(const std::vector<EigenResult>& res, std::ostream& os) {
  os << "k,lambda\n";
  for (const auto& e : res) os << e.k << ',' << fmt_sci(e.lambda) << '\n';
}

inline void eigenfunction_csv(const Eigenfunction& ef, std::ostream& os) {
  os << "r,u,v\n";
  for (const auto& s : ef.samples) detail::csv_row(os, {s[0], s[1], s[2]});
}

inline void solutions_csv(const std::vector<SolutionRecord>& recs, std::ostream& os) {
  os << "d,side,branch,j,residual,umin,umax\n";
  for (const auto& r : recs)
    os << fmt_sci(r.d) << ',' << to_string(r.side) << ',' << to_string(r.branch) << ',' << r.j << ','
       << fmt_sci(r.residual) << ',' << fmt_sci(r.u_min) << ',' << fmt_sci(r.u_max) << '\n';
}

inline void scan_csv(const ScanReport& rep, std::ostream& os) {
  os << "d,thetaR2\n";
  for (std::size_t i = 0; i < rep.d_grid.size(); ++i)
    detail::csv_row(os, {rep.d_grid[i], rep.theta_at_R2[i]});
}

inline void profile_csv(const SolutionRecord& rec, std::ostream& os) {
  os << "r,u,uprime\n";
  for (const auto& s : rec.profile) detail::csv_row(os, {s[0], s[1], s[2]});
}

// File name of the i-th record's profile, stable across runs.
inline std::string profile_name(const SolutionRecord& rec, std::size_t i) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "profile_%03zu_%s_j%d.csv", i, to_string(rec.side), rec.j);
  return buf;
}

struct SvgOptions {
  int width = 640;
  int height = 480;
  int margin = 40;
  int substeps = 8;  // dense points per accepted step
};

// Phase portrait in the (u, v) plane: u to the right, v upward.
// Ticks mark the points where theta - theta(R1) reaches i pi_p.
inline void svg_phase_portrait(const Problem& pb, const Trajectory& tr, std::ostream& os, const SvgOptions& opt = {}) {
  struct P {
    double u, v, th;
  };
  std::vector<P> pts;
  if (tr.constant || tr.samples.size() < 2) {
    pts.push_back({tr.constant ? 1.0 : tr.samples.front().u(), tr.constant ? 0.0 : tr.samples.front().v, 0.0});
  } else {
    pts.push_back({tr.samples.front().u(), tr.samples.front().v, tr.samples.front().theta});
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
      const auto& a = tr.samples[i - 1];
      const auto& b = tr.samples[i];
      if (!tr.dense.empty() && b.r > a.r) {
        for (int k = 1; k < opt.substeps; ++k) {
          const double r = a.r + (b.r - a.r) * k / opt.substeps;
          const Vec<2> z = tr.state_at(r);
          const double th = a.theta + (b.theta - a.theta) * k / opt.substeps;
          pts.push_back({1.0 + z[0], z[1], th});
        }
      }
      pts.push_back({b.u(), b.v, b.theta});
    }
  }

  double umin = 1.0, umax = 1.0, vmin = 0.0, vmax = 0.0;
  for (const auto& q : pts) {
    umin = std::min(umin, q.u);
    umax = std::max(umax, q.u);
    vmin = std::min(vmin, q.v);
    vmax = std::max(vmax, q.v);
  }
  const double du = std::max(umax - umin, 1e-12), dv = std::max(vmax - vmin, 1e-12);
  umin -= 0.05 * du;
  umax += 0.05 * du;
  vmin -= 0.05 * dv;
  vmax += 0.05 * dv;
  const double W = opt.width - 2.0 * opt.margin, Hh = opt.height - 2.0 * opt.margin;
  auto X = [&](double u) { return opt.margin + W * (u - umin) / (umax - umin); };
  auto Y = [&](double v) { return opt.margin + Hh * (vmax - v) / (vmax - vmin); };
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return std::string(buf);
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
  os << "<title>phase portrait d=" << fmt_sci(tr.d) << "</title>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes through the centre (1, 0)
  os << "<line class=\"axis\" x1=\"" << num(X(umin)) << "\" y1=\"" << num(Y(0)) << "\" x2=\"" << num(X(umax))
     << "\" y2=\"" << num(Y(0)) << "\" stroke=\"#999\"/>\n";
  os << "<line class=\"axis\" x1=\"" << num(X(1)) << "\" y1=\"" << num(Y(vmin)) << "\" x2=\"" << num(X(1))
     << "\" y2=\"" << num(Y(vmax)) << "\" stroke=\"#999\"/>\n";
  os << "<text x=\"" << opt.width - opt.margin << "\" y=\"" << opt.height - 10 << "\" font-size=\"12\">u</text>\n";
  os << "<text x=\"10\" y=\"" << opt.margin << "\" font-size=\"12\">v</text>\n";

  if (pts.size() == 1) {
    os << "<circle class=\"trajectory-point\" cx=\"" << num(X(pts[0].u)) << "\" cy=\"" << num(Y(pts[0].v))
       << "\" r=\"3\" fill=\"steelblue\"/>\n";
  } else {
    os << "<polyline class=\"trajectory\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << num(X(pts[i].u)) << ',' << num(Y(pts[i].v));
    os << "\"/>\n";
    const double pi = pb.pi_p(), t0 = tr.theta_start;
    // a half-turn completed at R2 to within 1e-6 rad still gets its tick
    for (int i = 1;; ++i) {
      const double target = t0 + i * pi;
      if (target > pts.back().th + 1e-6) break;
      std::size_t j = 1;
      while (j + 1 < pts.size() && pts[j].th < target) ++j;
      const auto& a = pts[j - 1];
      const auto& b = pts[j];
      const double s = b.th > a.th ? (target - a.th) / (b.th - a.th) : 0.0;
      const double x = X(a.u + s * (b.u - a.u)), y = Y(a.v + s * (b.v - a.v));
      os << "<line class=\"tick\" data-i=\"" << i << "\" x1=\"" << num(x) << "\" y1=\"" << num(y - 6) << "\" x2=\""
         << num(x) << "\" y2=\"" << num(y + 6) << "\" stroke=\"crimson\" stroke-width=\"2\"/>\n";
    }
  }
  os << "<circle class=\"centre\" cx=\"" << num(X(1)) << "\" cy=\"" << num(Y(0))
     << "\" r=\"4\" fill=\"none\" stroke=\"black\"/>\n";
  os << "</svg>\n";
}

}  // namespace plap
