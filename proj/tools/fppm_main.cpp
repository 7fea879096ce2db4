#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fppm/film.hpp"
#include "fppm/integrator.hpp"
#include "fppm/scene.hpp"

namespace {

struct RenderArgs {
  std::string scene;
  std::string algo;
  std::uint64_t iters = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string log;
  double r0_frac = 0.002;
  double k = 0.7;
  double alpha = 0.75;
  double alpha_f = 0.01;
  int na = 2;
  int ns = 6;
  int max_depth = 10;
  int threads = 0;
  std::string ref;
  std::string aux_prefix;
};

int run_render(const RenderArgs& args) {
  const fppm::Scene scene = fppm::load_scene(args.scene);
  const auto algorithm = fppm::parse_algorithm(args.algo);
  if (!algorithm) {
    std::cerr << "unknown algorithm '" << args.algo << "'\n";
    return 1;
  }

  fppm::IntegratorConfig cfg;
  cfg.algorithm = *algorithm;
  cfg.iterations = args.iters;
  cfg.seed = args.seed;
  cfg.max_depth = static_cast<std::uint32_t>(args.max_depth);
  cfg.threads = args.threads;
  cfg.r0_frac = args.r0_frac;
  cfg.schedule.k = args.k;
  cfg.schedule.alpha = args.alpha;
  cfg.test.alpha_f = args.alpha_f;
  cfg.test.n_annuli = args.na;
  cfg.test.n_sectors = args.ns;
  cfg.keep_reports = false; // the CSV rows are built as iterations finish

  std::optional<fppm::Image> ref;
  if (!args.ref.empty()) ref = fppm::read_pfm(args.ref);

  std::vector<fppm::ConvergenceRow> rows;
  const auto per_iteration = [&](const fppm::IterationReport& report,
                                 const fppm::Film& film) {
    fppm::ConvergenceRow row;
    row.iteration = report.iteration;
    row.seconds = report.seconds;
    if (ref) row.mse = fppm::mse(film.image(), *ref);
    if (!report.radius.empty())
      row.mean_radius =
          std::accumulate(report.radius.begin(), report.radius.end(), 0.0) /
          static_cast<double>(report.radius.size());
    double vc = 0, vm = 0;
    const std::size_t n =
        static_cast<std::size_t>(film.width()) * film.height();
    for (std::size_t px = 0; px < n; ++px) {
      vc += film.vc_total(px);
      vm += film.vm_total(px);
    }
    if (vc + vm > 0) row.vm_share = vm / (vc + vm);
    rows.push_back(row);
  };

  const fppm::RenderResult result =
      fppm::render(scene, cfg, args.log.empty() ? fppm::IterationCallback{}
                                                : per_iteration);

  fppm::write_pfm(args.out, result.film.image());
  if (!args.log.empty()) fppm::write_convergence_csv(args.log, rows);

  if (!args.aux_prefix.empty()) {
    const double r1 = cfg.r0_frac * fppm::bounding_radius(scene);
    const double r_min = cfg.schedule.r_min_base > 0 ? cfg.schedule.r_min_base
                                                     : 0.1 * r1;
    fppm::write_pfm(args.aux_prefix + "-radius.pfm",
                    result.film.radius_image(r_min, r1));
    fppm::write_pfm(args.aux_prefix + "-vc-share.pfm",
                    result.film.vc_share_image());
    fppm::write_pfm(args.aux_prefix + "-vm-share.pfm",
                    result.film.vm_share_image());
    if (ref)
      fppm::write_pfm(args.aux_prefix + "-sqerr.pfm",
                      result.film.squared_error_image(*ref));
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Progressive light transport renderer"};
  app.require_subcommand(1);

  RenderArgs ra;
  CLI::App* render = app.add_subcommand("render", "Render a scene to a PFM image");
  render->add_option("--scene", ra.scene, "Scene description file")->required();
  render
      ->add_option("--algo", ra.algo,
                   "Algorithm: pt, bdpt, sppm, cppm, fppm, vcm, vcm+")
      ->required()
      ->check(CLI::IsMember({"pt", "bdpt", "sppm", "cppm", "fppm", "vcm", "vcm+"}));
  render->add_option("--iters", ra.iters, "Progressive iterations")->required();
  render->add_option("--seed", ra.seed, "Random seed")->required();
  render->add_option("--out", ra.out, "Output PFM path")->required();
  render->add_option("--log", ra.log, "Per-iteration convergence CSV");
  render->add_option("--r0-frac", ra.r0_frac,
                     "Initial kernel radius over scene bounding radius");
  render->add_option("--k", ra.k, "Radius shrink factor on rejection");
  render->add_option("--alpha", ra.alpha, "Radius schedule exponent");
  render->add_option("--alpha-f", ra.alpha_f, "F-test significance level");
  render->add_option("--na", ra.na, "Kernel partition annuli");
  render->add_option("--ns", ra.ns, "Kernel partition sectors per annulus");
  render->add_option("--max-depth", ra.max_depth, "Maximum path segments");
  render->add_option("--threads", ra.threads, "Worker threads (default auto)");
  render->add_option("--ref", ra.ref, "Reference PFM for the mse column");
  render->add_option("--aux-prefix", ra.aux_prefix,
                     "Prefix for radius/share/error channel PFMs");

  std::vector<std::string> mse_paths;
  CLI::App* mse_cmd =
      app.add_subcommand("mse", "Print the MSE between two PFM images");
  mse_cmd->add_option("images", mse_paths, "Two PFM paths")
      ->expected(2)
      ->required();

  std::string slope_log;
  std::uint64_t slope_from = 0, slope_to = 0;
  CLI::App* slope_cmd = app.add_subcommand(
      "slope", "Print the log-log mse-vs-iteration slope of a convergence CSV");
  slope_cmd->add_option("log", slope_log, "Convergence CSV")->required();
  slope_cmd->add_option("from", slope_from, "First iteration of the fit window")
      ->required();
  slope_cmd->add_option("to", slope_to, "Last iteration of the fit window")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (render->parsed()) return run_render(ra);
    if (mse_cmd->parsed()) {
      const fppm::Image a = fppm::read_pfm(mse_paths[0]);
      const fppm::Image b = fppm::read_pfm(mse_paths[1]);
      std::printf("%.17g\n", fppm::mse(a, b));
      return 0;
    }
    if (slope_cmd->parsed()) {
      const std::vector<fppm::ConvergenceRow> rows =
          fppm::read_convergence_csv(slope_log);
      std::vector<std::uint64_t> iters;
      std::vector<double> mses;
      iters.reserve(rows.size());
      mses.reserve(rows.size());
      for (const fppm::ConvergenceRow& row : rows) {
        iters.push_back(row.iteration);
        mses.push_back(row.mse);
      }
      std::printf("%.17g\n",
                  fppm::fit_convergence_slope(iters, mses, slope_from, slope_to));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
