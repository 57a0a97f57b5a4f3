// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fracstab/fracstab.hpp"

using namespace fracstab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const char* id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string detail = r.detail;
  if (budget_s > 0.0 && s >= budget_s) {
    r.pass = false;
    char buf[64];
    std::snprintf(buf, sizeof buf, "; over budget %.0f s", budget_s);
    detail += buf;
  }
  if (!r.pass) ++failures;
  std::printf("[%s] %-4s %-44s %8.3f s  %s\n", r.pass ? "PASS" : "FAIL", id, title, s, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool near(Complex a, Complex b, double tol) {
  return std::abs(a.real() - b.real()) <= tol && std::abs(a.imag() - b.imag()) <= tol;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FRACSTAB_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome pipeline(Complex lambda, Complex c_expect, std::optional<Complex> orbit_expect, bool expect_converge) {
  const double q = 0.85;
  const Complex c = eigen_to_c(lambda);
  const auto p = fom_point(c, q, 1000);
  const Complex fp = fixed_points(c).z1;
  bool ok = near(c, c_expect, 5e-4);
  std::string d = fmt("c=(%.5f,%.5f) ", c.real(), c.imag());
  if (expect_converge) {
    ok = ok && p.verdict.converged() && near(p.verdict.point, *orbit_expect, 1e-3);
    d += fmt("orbit->(%.5f,%.5f) i*sqrt(c)=(%.5f,%.5f)", p.verdict.point.real(), p.verdict.point.imag(), fp.real(),
             fp.imag());
  } else {
    ok = ok && p.verdict.diverged();
    d += fmt("orbit diverged at n=%.0f", static_cast<double>(p.verdict.escape_index));
  }
  return {ok, d};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "fracstab_acceptance";
  fs::create_directories(scratch);

  criterion("AC1", "magenta pipeline", 1.0, [] {
    auto r = pipeline({-0.5701, 0.3019}, {-0.0585, 0.0861}, Complex{-0.2845, 0.1510}, true);
    const Complex fp = fixed_points(eigen_to_c({-0.5701, 0.3019})).z1;
    r.pass = r.pass && near(fp, {-0.2851, 0.1510}, 1e-3);
    return r;
  });

  criterion("AC2", "green pipeline", 0.0, [] {
    const Complex c = eigen_to_c({0.1464, -0.2268});
    return pipeline({0.1464, -0.2268}, {0.0075, 0.0166}, fixed_points(c).z1, true);
  });

  criterion("AC3", "blue pipeline", 0.0,
            [] { return pipeline({0.1231, 0.5590}, {0.0743, 0.0344}, std::nullopt, false); });

  criterion("AC4", "A_q anchor values", 0.0, [] {
    const auto a = a_q({-1.0, 0.0}, 0.5);
    const auto b = a_q({0.0, 1.0}, 0.5);
    const bool ok = a.is_real() && std::abs(a.real_part + 0.4142) <= 5e-4 && b.is_real() &&
                    std::abs(b.real_part) <= 1e-9;
    return Outcome{ok, fmt("a_q(-1)=%.6f a_q(i)=%.2e", a.real_part, b.real_part)};
  });

  criterion("AC5", "complex-power sector at q=0.8", 0.0, [] {
    const double q = 0.8;
    std::size_t complex_hits = 0, mismatches = 0, tested = 0;
    for (int i = 0; i <= 200; ++i) {
      for (int k = 0; k <= 200; ++k) {
        const Complex z{-2.0 + 0.02 * i, -2.0 + 0.02 * k};
        if (z == Complex{0.0, 0.0}) continue;
        ++tested;
        const bool cplx = a_q(z, q).is_complex();
        const bool sector = std::abs(principal_arg(z)) < 0.4 * pi;
        complex_hits += cplx;
        mismatches += cplx != sector;
      }
    }
    const auto in = a_q({-1.0, 0.0}, q);
    const auto out = a_q({-2.0, 0.0}, q);
    const bool ok = complex_hits > 0 && mismatches == 0 && in.real_part < 0.0 && out.real_part > 0.0;
    return Outcome{ok, fmt("%.0f of %.0f points complex, %.0f off-sector; a_q(-1)=%.4f", double(complex_hits),
                           double(tested), double(mismatches), in.real_part) +
                           fmt(" a_q(-2)=%.4f", out.real_part)};
  });

  criterion("AC6", "frontier identity, 1e4 samples", 1.0, [] {
    double worst = 0.0, worst_arg = 1.0;
    bool ok = true;
    for (double q : {0.3, 0.5, 0.8, 0.85}) {
      const auto c = boundary_curve(q, 10000);
      for (std::size_t k = 1; k + 1 < c.size(); ++k) {
        const auto v = a_q(c.points[k], q);
        const double slack = std::abs(principal_arg(c.points[k])) - (q * pi / 2 - 1e-12);
        ok = ok && v.is_real() && std::abs(v.real_part) < 1e-9 && slack >= 0.0;
        worst = std::max(worst, std::abs(v.real_part));
        worst_arg = std::min(worst_arg, slack);
      }
    }
    return Outcome{ok, fmt("max|a_q|=%.2e min arg slack=%.2e", worst, worst_arg)};
  });

  criterion("AC7", "q=1 degenerations", 30.0, [] {
    const auto circle = boundary_curve(1.0, 10000);
    double dev = 0.0;
    for (const auto& z : circle.points) dev = std::max(dev, std::abs(std::abs(z + 1.0) - 1.0));
    const auto area = region_area_grid(1.0, BranchPolicy::PrincipalComplex, {-2.2, 2.2, -2.2, 2.2}, 2000);
    const double rel = std::abs(area.value - pi) / pi;

    const Window w{-2.5, 0.5, -1.5, 1.5};
    const std::size_t steps = 150;
    const auto g = fom_raster(w, 500, 500, 1.0, steps, default_fom_escape);
    std::size_t diff = 0;
    for (std::size_t j = 0; j < g.height; ++j) {
      for (std::size_t i = 0; i < g.width; ++i) {
        const Complex c = g.center(i, j);
        Complex z{0.0, 0.0};
        bool member = true;
        for (std::size_t n = 1; n <= steps; ++n) {
          z = z + Complex{z.real() * z.real() - z.imag() * z.imag() + c.real(), 2.0 * z.real() * z.imag() + c.imag()};
          if (!std::isfinite(std::abs(z)) || std::abs(z) > default_fom_escape) {
            member = false;
            break;
          }
        }
        diff += member != g.at(i, j).member;
      }
    }
    const bool ok = dev <= 1e-12 && rel <= 0.01 && diff == 0;
    return Outcome{ok, fmt("circle dev=%.1e area=%.5f (rel %.2e) raster mismatches=%.0f", dev, area.value, rel,
                           double(diff))};
  });

  criterion("AC8", "power-law decay and instability flag", 5.0, [&scratch] {
    Eigen::MatrixXd A(1, 1);
    A << -0.5;
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    const auto t = linear_orbit(0.5, A, y0, 4000);
    const auto fit = decay_exponent(t, 400, 4000);
    A << -2.5;
    const auto u = linear_orbit(0.5, A, y0, 4000);
    const bool grows = u.escaped() || state_norm(u.back()) >= state_norm(u.states[u.size() / 2]);
    const fs::path log = scratch / "ac8.txt";
    const int code =
        run_cli("simulate --q 0.5 --matrix -2.5 --y0 1 --iters 4000 --out " + (scratch / "ac8.csv").string(), log);
    const bool flagged = code == 0 && slurp(log).find("status=unstable") != std::string::npos;
    const bool ok = !t.escaped() && fit.slope >= -0.65 && fit.slope <= -0.35 && grows && flagged;
    return Outcome{ok, fmt("slope=%.4f; lambda=-2.5 ", fit.slope) + (flagged ? "flagged unstable" : "NOT flagged")};
  });

  criterion("AC9", "Gamma(c) -> eigenvalue -> frontier", 0.0, [] {
    double worst = 0.0;
    bool ok = true;
    for (double q : {0.5, 0.85}) {
      // 1000 samples strictly inside |theta| < pi/2; both ends of the curve sit on the origin
      const auto g = gamma_c_curve(q, 1002);
      const auto f = boundary_curve(q, 1002);
      for (std::size_t k = 1; k + 1 < g.size(); ++k) {
        const auto v = a_q(matching_eigenvalue(g.points[k], f.points[k]), q);
        ok = ok && v.is_real() && std::abs(v.real_part) < 1e-8;
        worst = std::max(worst, std::abs(v.real_part));
      }
    }
    return Outcome{ok, fmt("max|a_q|=%.2e over 2x1000 samples", worst)};
  });

  criterion("AC10", "coverage trend (600^2, N=300)", 300.0, [] {
    RasterParams p;
    std::string d;
    std::vector<double> ratios;
    for (double q : {0.5, 0.3, 0.1, 0.85}) {
      const auto r = coverage_report(q, p);
      ratios.push_back(r.ratio);
      d += fmt("q=%.2f:%.4f ", q, r.ratio);
    }
    const bool ok = ratios[0] > ratios[1] && ratios[1] > ratios[2] && ratios[3] < 1.0;
    return Outcome{ok, d};
  });

  criterion("AC11", "byte-identical output, 1 vs 8 threads", 0.0, [&scratch] {
    const std::vector<std::pair<std::string, std::vector<std::string>>> cmds = {
        {"mandelbrot --q 0.8 --size 160x140 --iters 200 --overlay gamma", {".ppm", "_overlay.csv"}},
        {"mandelbrot --iom --size 160x140 --iters 200 --overlay cardioid", {".ppm", "_overlay.csv"}},
        {"domain --q 0.6 --size 200x200", {".ppm", "_boundary.csv", "_rays.csv"}},
    };
    std::size_t compared = 0;
    bool ok = true;
    int idx = 0;
    for (const auto& [args, suffixes] : cmds) {
      const std::string a = (scratch / ("ac11_" + std::to_string(idx) + "_t1")).string();
      const std::string b = (scratch / ("ac11_" + std::to_string(idx) + "_t8")).string();
      ++idx;
      ok = ok && run_cli(args + " --threads 1 --out " + a, scratch / "ac11.log") == 0;
      ok = ok && run_cli(args + " --threads 8 --out " + b, scratch / "ac11.log") == 0;
      for (const auto& s : suffixes) {
        const std::string x = slurp(a + s);
        ok = ok && !x.empty() && x == slurp(b + s);
        ++compared;
      }
    }
    const fs::path s1 = scratch / "ac11_sweep_t1";
    const fs::path s8 = scratch / "ac11_sweep_t8";
    const std::string sweep = "sweep --q-start 0.3 --q-end 0.9 --steps 3 --size 60x60 --cov-size 80x80 --iters 80 --fom";
    ok = ok && run_cli(sweep + " --threads 1 --out " + s1.string(), scratch / "ac11.log") == 0;
    ok = ok && run_cli(sweep + " --threads 8 --out " + s8.string(), scratch / "ac11.log") == 0;
    for (const auto& e : fs::directory_iterator(s1)) {
      ok = ok && slurp(e.path()) == slurp(s8 / e.path().filename());
      ++compared;
    }
    return Outcome{ok, fmt("%.0f output files compared", double(compared))};
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
