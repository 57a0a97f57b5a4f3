// fracstab: stability domains of fractional difference systems and the
// fractional-order Mandelbrot map, from the command line.
//
// Exit codes: 0 success, 2 invalid flags, 3 I/O failure, 4 verification discordance.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fracstab/fracstab.hpp"

namespace fs = std::filesystem;
using namespace fracstab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;
constexpr int kExitDiscordant = 4;

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("bad number in --") + what + ": '" + cell + "'");
    }
    if (!std::isfinite(out.back())) throw std::invalid_argument(std::string("non-finite value in --") + what);
  }
  return out;
}

Window parse_window(const std::string& text) {
  const auto v = parse_list(text, "window");
  if (v.size() != 4) throw std::invalid_argument("--window expects x0,x1,y0,y1");
  Window w{v[0], v[1], v[2], v[3]};
  if (!w.valid()) throw std::invalid_argument("--window needs x0 < x1 and y0 < y1");
  return w;
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw std::invalid_argument("--size expects WxH");
  try {
    const long w = std::stol(text.substr(0, x));
    const long h = std::stol(text.substr(x + 1));
    if (w < 1 || h < 1 || w > 20000 || h > 20000) throw std::out_of_range(text);
    return {static_cast<std::size_t>(w), static_cast<std::size_t>(h)};
  } catch (const std::logic_error&) {
    throw std::invalid_argument("--size expects WxH with 1 <= W,H <= 20000");
  }
}

BranchPolicy parse_policy(const std::string& name) {
  if (name == "principal") return BranchPolicy::PrincipalComplex;
  if (name == "oddroot") return BranchPolicy::RealOddRoot;
  if (name == "restricted") return BranchPolicy::RestrictedDomain;
  throw std::invalid_argument("--policy must be principal, oddroot or restricted");
}

const CLI::Validator kOrder = CLI::Validator(
    [](std::string& s) -> std::string {
      double q = 0.0;
      try {
        q = std::stod(s);
      } catch (const std::exception&) {
        return "not a number";
      }
      if (!(q > 0.0 && q <= 1.0)) return "order q must lie in (0, 1]";
      return {};
    },
    "ORDER in (0,1]");

std::string with_suffix(const std::string& prefix, const std::string& suffix) { return prefix + suffix; }

void ensure_parent(const fs::path& p) {
  const fs::path dir = p.parent_path();
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());
}

struct Common {
  double q = 0.85;
  std::string policy = "principal";
  std::string window;
  std::string size;
  std::size_t iters = 0;
  double escape = default_fom_escape;
  double tol = default_conv_tol;
  unsigned threads = 0;
  std::string out;
};

void add_threads(CLI::App* cmd, Common& c) {
  cmd->add_option("--threads", c.threads, "worker threads (0 = one per core)")->capture_default_str();
}

// --- domain ----------------------------------------------------------------

int run_domain(const Common& c, std::size_t samples) {
  const BranchPolicy policy = parse_policy(c.policy);
  const Window window = parse_window(c.window);
  const auto [w, h] = parse_size(c.size);
  if (samples < 3) throw std::invalid_argument("--samples must be >= 3");

  Image img = domain_image(window, w, h, c.q, policy, c.threads);
  const Polyline frontier = boundary_curve(c.q, samples);
  draw_polyline(img, RasterGrid(window, w, h), frontier, color_boundary);
  const double reach = std::max({std::abs(window.x0), std::abs(window.x1), std::abs(window.y0), std::abs(window.y1)});
  const auto [upper, lower] = matignon_rays(c.q, reach * std::sqrt(2.0));

  CsvTable rays{{"ray", "x", "y"}, {}};
  for (const auto& p : upper.points) rays.add_row({1.0, p.real(), p.imag()});
  for (const auto& p : lower.points) rays.add_row({-1.0, p.real(), p.imag()});

  ensure_parent(c.out);
  write_ppm(with_suffix(c.out, ".ppm"), img);
  write_csv(with_suffix(c.out, "_boundary.csv"), polyline_table(frontier));
  write_csv(with_suffix(c.out, "_rays.csv"), rays);

  std::size_t interior = 0, complex_power = 0;
  for (const Rgb& p : img.pixels) {
    interior += p == color_interior;
    complex_power += p == color_complex_power;
  }
  std::cout << "q=" << c.q << " policy=" << to_string(policy) << " interior_pixels=" << interior
            << " complex_power_pixels=" << complex_power << "\n";
  return kExitOk;
}

// --- mandelbrot ------------------------------------------------------------

int run_mandelbrot(const Common& c, const std::string& overlay, bool iom, const std::string& manifest) {
  const Window window = parse_window(c.window);
  const auto [w, h] = parse_size(c.size);
  if (c.iters == 0) throw std::invalid_argument("--iters must be >= 1");
  if (!(c.escape > 0.0)) throw std::invalid_argument("--escape must be positive");
  if (overlay != "gamma" && overlay != "cardioid" && overlay != "none") {
    throw std::invalid_argument("--overlay must be gamma, cardioid or none");
  }

  const auto t0 = std::chrono::steady_clock::now();
  const RasterGrid grid =
      iom ? iom_raster(window, w, h, c.iters, c.threads) : fom_raster(window, w, h, c.q, c.iters, c.escape, c.threads);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Image img = raster_image(grid);
  std::optional<Polyline> curve;
  if (overlay == "gamma") curve = gamma_c_curve(c.q, default_gamma_samples);
  if (overlay == "cardioid") curve = iom_cardioid(default_gamma_samples);
  if (curve) draw_polyline(img, grid, *curve, color_boundary);

  ensure_parent(c.out);
  write_ppm(with_suffix(c.out, ".ppm"), img);
  if (curve) write_csv(with_suffix(c.out, "_overlay.csv"), polyline_table(*curve));

  const nlohmann::json line = {
      {"command", "mandelbrot"},
      {"map", iom ? "iom" : "fom"},
      {"q", c.q},
      {"window", {window.x0, window.x1, window.y0, window.y1}},
      {"width", w},
      {"height", h},
      {"iters", c.iters},
      {"escape", c.escape},
      {"overlay", overlay},
      {"threads", resolve_threads(c.threads)},
      {"seconds", seconds},
      {"member_pixels", grid.member_count()},
      {"total_pixels", grid.cells.size()},
      {"image", with_suffix(c.out, ".ppm")},
  };
  std::cout << line.dump() << "\n";
  if (!manifest.empty()) {
    ensure_parent(manifest);
    std::ofstream m(manifest, std::ios::app);
    if (!m) throw IoError("cannot open manifest " + manifest);
    m << line.dump() << "\n";
  }
  return kExitOk;
}

// --- verify ----------------------------------------------------------------

int run_verify(const Common& c, const std::string& lambda_text) {
  const auto v = parse_list(lambda_text, "lambda");
  if (v.size() != 2) throw std::invalid_argument("--lambda expects x,y");
  if (c.iters == 0) throw std::invalid_argument("--iters must be >= 1");
  if (!(c.tol > 0.0)) throw std::invalid_argument("--tol must be positive");
  if (!(c.q < 1.0)) throw std::invalid_argument("verify needs q < 1");
  const BranchPolicy policy = parse_policy(c.policy);
  const Complex lambda{v[0], v[1]};

  const StabilityVerdict verdict = classify(lambda, c.q, policy);
  const Complex param = eigen_to_c(lambda);
  const FixedPoints fp = fixed_points(param);
  const FomPoint orbit = fom_point(param, c.q, c.iters, c.escape, c.tol);

  std::printf("lambda          = (%.6f, %.6f)\n", lambda.real(), lambda.imag());
  std::printf("verdict         = %s (matignon_ok=%d)\n", std::string(to_string(verdict.kind)).c_str(),
              verdict.matignon_ok ? 1 : 0);
  std::printf("c               = (%.6f, %.6f)\n", param.real(), param.imag());
  std::printf("fixed point i*sqrt(c) = (%.6f, %.6f)\n", fp.z1.real(), fp.z1.imag());
  const Complex jac = jacobian_eigenvalue(fp.z1);
  std::printf("2 z1*           = (%.6f, %.6f) -> %s\n", jac.real(), jac.imag(),
              std::string(to_string(classify(jac, c.q, policy).kind)).c_str());
  std::printf("orbit           = %s", std::string(to_string(orbit.verdict.kind)).c_str());

  bool converged_to_fixed = false;
  if (orbit.verdict.converged()) {
    const Complex p = orbit.verdict.point;
    const double err = std::abs(p - fp.z1);
    converged_to_fixed = err <= c.tol;
    std::printf(" (%.6f, %.6f), fixed-point error %.3e\n", p.real(), p.imag(), err);
  } else if (orbit.verdict.diverged()) {
    std::printf(" at n=%zu\n", orbit.verdict.escape_index);
  } else {
    std::printf("\n");
  }

  // A stable eigenvalue predicts convergence to i sqrt(c). A non-interior
  // eigenvalue whose orbit still settles is reported but not counted against.
  const bool concordant = !verdict.stable() || converged_to_fixed;
  if (!verdict.stable() && converged_to_fixed) {
    std::printf("note            = orbit converges although lambda is not interior\n");
  }
  std::printf("concordant      = %s\n", concordant ? "yes" : "no");
  if (!concordant) {
    std::fprintf(stderr, "discordance: lambda is StableInterior but the orbit did not converge to i*sqrt(c)\n");
    return kExitDiscordant;
  }
  return kExitOk;
}

// --- sweep -----------------------------------------------------------------

int run_sweep(const Common& c, double q_start, double q_end, std::size_t steps, bool fom_frames,
              const std::string& cov_size) {
  if (!(q_start > 0.0 && q_start <= q_end && q_end <= 1.0)) {
    throw std::invalid_argument("sweep needs 0 < q-start <= q-end <= 1");
  }
  if (steps == 0) throw std::invalid_argument("--steps must be >= 1");
  if (c.iters == 0) throw std::invalid_argument("--iters must be >= 1");
  const BranchPolicy policy = parse_policy(c.policy);
  const Window window = parse_window(c.window);
  const auto [w, h] = parse_size(c.size);
  const auto [cw, ch] = parse_size(cov_size);

  const fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());

  RasterParams params;
  params.width = cw;
  params.height = ch;
  params.steps = c.iters;
  params.escape_radius = c.escape;
  params.threads = c.threads;

  CsvTable cov{{"q", "main_body_pixels", "region_pixels", "intersection", "ratio"}, {}};
  for (std::size_t k = 0; k < steps; ++k) {
    const double q = steps == 1 ? q_start
                                : q_start + (q_end - q_start) * static_cast<double>(k) / static_cast<double>(steps - 1);
    char name[64];
    std::snprintf(name, sizeof name, "frame_%04zu.ppm", k);
    write_ppm(dir / name, domain_image(window, w, h, q, policy, c.threads));

    if (fom_frames) {
      const RasterGrid grid = fom_raster(params.window, cw, ch, q, c.iters, c.escape, c.threads);
      Image img = raster_image(grid);
      draw_polyline(img, grid, gamma_c_curve(q, default_gamma_samples), color_boundary);
      std::snprintf(name, sizeof name, "fom_%04zu.ppm", k);
      write_ppm(dir / name, img);
    }

    const CoverageReport r = coverage_report(q, params, policy);
    cov.add_row({q, static_cast<double>(r.main_body_pixels), static_cast<double>(r.stability_region_pixels),
                 static_cast<double>(r.intersection_pixels), r.ratio});
    std::printf("q=%.6f main_body=%zu region=%zu intersection=%zu ratio=%.6f\n", q, r.main_body_pixels,
                r.stability_region_pixels, r.intersection_pixels, r.ratio);
  }
  write_csv(dir / "coverage.csv", cov);
  return kExitOk;
}

// --- simulate --------------------------------------------------------------

int run_simulate(const Common& c, const std::string& matrix_text, const std::string& y0_text) {
  const auto a = parse_list(matrix_text, "matrix");
  const auto y = parse_list(y0_text, "y0");
  const auto d = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(a.size()))));
  if (a.empty() || d * d != a.size() || d > 4) throw std::invalid_argument("--matrix needs d*d entries with d <= 4");
  if (y.size() != d) throw std::invalid_argument("dimension mismatch between --matrix and --y0");
  if (c.iters < 20) throw std::invalid_argument("--iters must be >= 20");
  if (!(c.q < 1.0)) throw std::invalid_argument("simulate needs q < 1");

  Eigen::MatrixXd A(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t k = 0; k < d; ++k) A(r, k) = a[r * d + k];
  const Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(d));

  const auto traj = linear_orbit(c.q, A, y0, c.iters);

  CsvTable table{{"n", "norm"}, {}};
  for (std::size_t k = 0; k < d; ++k) table.header.push_back("y" + std::to_string(k + 1));
  for (std::size_t n = 0; n < traj.size(); ++n) {
    std::vector<double> row{static_cast<double>(n), traj.states[n].norm()};
    for (std::size_t k = 0; k < d; ++k) row.push_back(traj.states[n](static_cast<Eigen::Index>(k)));
    table.add_row(std::move(row));
  }
  ensure_parent(c.out);
  write_csv(c.out, table);

  const std::size_t last = traj.size() - 1;
  const bool escaped = traj.escaped();
  const bool growing = !escaped && traj.states[last].norm() >= traj.states[last / 2].norm();
  std::printf("steps=%zu final_norm=%.6e\n", last, traj.states[last].norm());
  if (!escaped && last >= 20) {
    const std::size_t first = std::max<std::size_t>(1, last / 10);
    try {
      const DecayFit fit = decay_exponent(traj, first, last);
      std::printf("decay_slope=%.6f window=[%zu,%zu] residual=%.3e expected=%.6f\n", fit.slope, fit.first, fit.last,
                  fit.residual, -c.q);
    } catch (const std::domain_error& e) {
      std::printf("decay_slope=n/a (%s)\n", e.what());
    }
  }
  std::printf("status=%s\n", escaped || growing ? "unstable" : "decaying");
  return kExitOk;
}

// --- area ------------------------------------------------------------------

int run_area(const Common& c, std::size_t cells, std::size_t samples) {
  const BranchPolicy policy = parse_policy(c.policy);
  const Window window = parse_window(c.window);
  const AreaEstimate grid = region_area_grid(c.q, policy, window, cells, c.threads);
  const AreaEstimate green = region_area_green(c.q, samples);
  std::printf("grid_area=%.10f cell=%.3e policy=%s\n", grid.value, grid.resolution,
              std::string(to_string(policy)).c_str());
  std::printf("green_area=%.10f samples=%zu\n", green.value, samples);
  if (!c.out.empty()) {
    CsvTable t{{"q", "grid_area", "grid_cell", "green_area", "green_samples"}, {}};
    t.add_row({c.q, grid.value, grid.resolution, green.value, static_cast<double>(samples)});
    ensure_parent(c.out);
    write_csv(c.out, t);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability domains of fractional difference systems and fractional Mandelbrot maps"};
  app.require_subcommand(1);

  // One option block per subcommand: CLI11 writes defaults into the bound
  // variables as soon as they are declared.
  Common dc, mc, vc, sc, simc, ac;
  std::size_t samples = 2000;
  std::size_t area_samples = 100000;
  std::size_t cells = 1000;
  std::string overlay = "none";
  std::string manifest;
  bool iom = false;
  std::string lambda;
  double q_start = 0.1, q_end = 0.9;
  std::size_t steps = 9;
  bool fom_frames = false;
  std::string cov_size = "200x200";
  std::string matrix, y0;

  auto* domain = app.add_subcommand("domain", "render S^q membership, frontier and Matignon rays");
  domain->add_option("--q", dc.q, "fractional order")->required()->check(kOrder);
  domain->add_option("--policy", dc.policy, "negative-base power rule")->capture_default_str();
  domain->add_option("--window", dc.window, "x0,x1,y0,y1")->default_val("-2.2,2.2,-2.2,2.2");
  domain->add_option("--size", dc.size, "WxH")->default_val("800x800");
  domain->add_option("--samples", samples, "frontier samples")->capture_default_str();
  domain->add_option("--out", dc.out, "output prefix")->required();
  add_threads(domain, dc);

  auto* mandel = app.add_subcommand("mandelbrot", "render the fractional-order Mandelbrot set");
  mandel->add_option("--q", mc.q, "fractional order")->check(kOrder)->capture_default_str();
  mandel->add_option("--window", mc.window, "x0,x1,y0,y1")->default_val("-2,0.5,-1.25,1.25");
  mandel->add_option("--size", mc.size, "WxH")->default_val("600x600");
  mandel->add_option("--iters", mc.iters, "iterations")->default_val(default_fom_iters);
  mandel->add_option("--escape", mc.escape, "escape radius")->capture_default_str();
  mandel->add_option("--overlay", overlay, "gamma, cardioid or none")->capture_default_str();
  mandel->add_flag("--iom", iom, "classical z <- z^2 + c instead of the fractional map");
  mandel->add_option("--manifest", manifest, "append the JSON run line to this file");
  mandel->add_option("--out", mc.out, "output prefix")->required();
  add_threads(mandel, mc);

  auto* verify = app.add_subcommand("verify", "lambda -> c -> orbit -> fixed point pipeline");
  verify->add_option("--lambda", lambda, "eigenvalue x,y")->required();
  verify->add_option("--q", vc.q, "fractional order")->check(kOrder)->capture_default_str();
  verify->add_option("--iters", vc.iters, "iterations")->default_val(default_fom_iters);
  verify->add_option("--escape", vc.escape, "escape radius")->capture_default_str();
  verify->add_option("--tol", vc.tol, "convergence tolerance")->capture_default_str();
  verify->add_option("--policy", vc.policy, "negative-base power rule")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "frames and coverage ratios over a range of q");
  sweep->add_option("--q-start", q_start)->check(kOrder)->capture_default_str();
  sweep->add_option("--q-end", q_end)->check(kOrder)->capture_default_str();
  sweep->add_option("--steps", steps)->capture_default_str();
  sweep->add_option("--policy", sc.policy, "negative-base power rule")->capture_default_str();
  sweep->add_option("--window", sc.window, "domain frame window")->default_val("-2.2,2.2,-2.2,2.2");
  sweep->add_option("--size", sc.size, "domain frame WxH")->default_val("400x400");
  sweep->add_option("--cov-size", cov_size, "FOM raster WxH for coverage")->capture_default_str();
  sweep->add_option("--iters", sc.iters, "FOM iterations")->default_val(300);
  sweep->add_option("--escape", sc.escape, "escape radius")->capture_default_str();
  sweep->add_flag("--fom", fom_frames, "also write FOM + Gamma(c) frames");
  sweep->add_option("--out", sc.out, "output directory")->required();
  add_threads(sweep, sc);

  auto* simulate = app.add_subcommand("simulate", "linear fractional difference system and decay fit");
  simulate->add_option("--q", simc.q, "fractional order")->required()->check(kOrder);
  simulate->add_option("--matrix", matrix, "row-major entries, d*d with d <= 4")->required();
  simulate->add_option("--y0", y0, "initial state")->required();
  simulate->add_option("--iters", simc.iters, "steps")->default_val(4000);
  simulate->add_option("--out", simc.out, "trajectory CSV")->required();

  auto* area = app.add_subcommand("area", "area of S^q by grid count and by the frontier");
  area->add_option("--q", ac.q, "fractional order")->required()->check(kOrder);
  area->add_option("--policy", ac.policy, "negative-base power rule")->capture_default_str();
  area->add_option("--window", ac.window, "x0,x1,y0,y1")->default_val("-2.2,2.2,-2.2,2.2");
  area->add_option("--cells", cells, "cells per side")->capture_default_str();
  area->add_option("--samples", area_samples, "frontier samples")->capture_default_str();
  area->add_option("--out", ac.out, "optional CSV");
  add_threads(area, ac);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*domain) return run_domain(dc, samples);
    if (*mandel) return run_mandelbrot(mc, overlay, iom, manifest);
    if (*verify) return run_verify(vc, lambda);
    if (*sweep) return run_sweep(sc, q_start, q_end, steps, fom_frames, cov_size);
    if (*simulate) return run_simulate(simc, matrix, y0);
    if (*area) return run_area(ac, cells, area_samples);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
