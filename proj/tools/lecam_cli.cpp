#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lecam/divergences.hpp"
#include "lecam/experiment_config.hpp"
#include "lecam/tabular_oracle.hpp"
#include "lecam/text_io.hpp"
#include "lecam/trainer.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<double> load_weight_csv(const std::string& path) {
  std::istringstream in(lecam::read_file(path));
  std::vector<double> weights;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    double v;
    if (!lecam::parse_double(line, v)) {
      if (line_no == 1) continue;  // tolerate a header row
      throw std::runtime_error("divergence: " + path + ":" +
                               std::to_string(line_no) + ": not numeric");
    }
    weights.push_back(v);
  }
  if (weights.empty()) {
    throw std::runtime_error("divergence: " + path + ": no weights");
  }
  return weights;
}

lecam::DiscreteDistribution load_distribution(const std::string& path) {
  try {
    return lecam::DiscreteDistribution::normalized(load_weight_csv(path));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("divergence: " + path + ": " + e.what());
  }
}

int cmd_divergence(const std::string& p_path, const std::string& q_path) {
  using lecam::DivergenceKind;
  const auto p = load_distribution(p_path);
  const auto q = load_distribution(q_path);

  const double delta = lecam::lecam(p, q);
  const double js = lecam::divergence(DivergenceKind::JS, p, q);
  const double chi2 = lecam::divergence(DivergenceKind::ChiSquared, p, q);
  const double tv = lecam::divergence(DivergenceKind::TotalVariation, p, q);
  const double kl = lecam::divergence(DivergenceKind::KL, p, q);

  std::cout << "lecam " << lecam::format_double(delta) << "\n"
            << "js " << lecam::format_double(js) << "\n"
            << "chi2 " << lecam::format_double(chi2) << "\n"
            << "tv " << lecam::format_double(tv) << "\n"
            << "kl " << lecam::format_double(kl) << "\n";
  std::cout << "chain 0.25*lecam <= js <= 0.5*lecam <= 0.5*tv: "
            << lecam::format_double(0.25 * delta) << " <= "
            << lecam::format_double(js) << " <= "
            << lecam::format_double(0.5 * delta) << " <= "
            << lecam::format_double(0.5 * tv) << "\n";
  return 0;
}

int cmd_curves(const std::string& out_path) {
  using lecam::DivergenceKind;
  std::ostringstream out;
  out << "t,lecam,lecam_weighted_quarter,js,chi2,tv,kl\n";
  for (int i = 0; i < 200; ++i) {
    // 200 log-spaced points in [1e-3, 1e3); index 100 lands exactly on t = 1.
    const double exponent = -3.0 + 6.0 * static_cast<double>(i) / 200.0;
    const double t = std::pow(10.0, exponent);
    const double lc = lecam::f_curve(DivergenceKind::LeCam, t);
    out << lecam::format_double(t) << ',' << lecam::format_double(lc) << ','
        << lecam::format_double(0.25 * lc) << ','
        << lecam::format_double(lecam::f_curve(DivergenceKind::JS, t)) << ','
        << lecam::format_double(lecam::f_curve(DivergenceKind::ChiSquared, t)) << ','
        << lecam::format_double(lecam::f_curve(DivergenceKind::TotalVariation, t)) << ','
        << lecam::format_double(lecam::f_curve(DivergenceKind::KL, t)) << '\n';
  }
  lecam::write_file(out_path, out.str());
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_prop1_verify(std::size_t trials, std::uint64_t seed, bool negative) {
  const lecam::Prop1Report report = lecam::verify_prop1(trials, seed, negative);
  std::cout << "trials " << report.trials << "\n";
  std::cout << "max_identity_error "
            << lecam::format_double(report.max_identity_error) << "\n";
  std::cout << "max_stationarity_residual "
            << lecam::format_double(report.max_stationarity_residual) << "\n";
  if (negative) {
    std::cout << "negative_cg " << report.negative_cg_count << "/"
              << report.trials << "\n";
    const bool pass = report.negative_cg_count == report.trials;
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
  }
  const bool pass = report.max_identity_error <= 1e-9 &&
                    report.max_stationarity_residual <= 1e-10;
  std::cout << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              std::optional<std::string> out_dir) {
  lecam::ExperimentConfig cfg = lecam::load_experiment_config(config_path);
  if (seed) cfg.train.seed = *seed;
  if (out_dir) cfg.output.dir = *out_dir;

  const fs::path run_dir = fs::path(cfg.output.dir) / lecam::run_dir_name(cfg);
  fs::create_directories(run_dir);
  lecam::write_file((run_dir / "config.snapshot").string(), lecam::serialize(cfg));

  const lecam::Dataset2D data = lecam::build_dataset(cfg.dataset);
  lecam::TrainResult result = lecam::train(cfg.train, data);

  {
    std::ostringstream metrics;
    lecam::write_metrics_csv(result.record, metrics);
    lecam::write_file((run_dir / "metrics.csv").string(), metrics.str());
  }
  result.generator.save((run_dir / "g_final.ckpt").string());
  result.discriminator.save((run_dir / "d_final.ckpt").string());

  if (result.record.aborted) {
    std::cerr << "error: train: " << result.record.abort_reason
              << " (partial metrics in " << run_dir.string() << ")\n";
    return 2;
  }
  const lecam::RunRow& last = result.record.rows.back();
  std::cout << "run_dir " << run_dir.string() << "\n";
  std::cout << "final proxy_fd " << lecam::format_double(last.proxy_fd)
            << " modes_covered " << last.modes_covered << "\n";
  if (result.record.constraint_warnings > 0) {
    std::cout << "constraint_warnings " << result.record.constraint_warnings
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LeCam-regularized GAN training and divergence toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // let subcommands consume the global --seed/--out

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  app.add_option("--seed", seed, "Override the run seed")->group("Global");
  app.add_option("--out", out, "Override the output directory/path")->group("Global");

  auto* train = app.add_subcommand("train", "Run a training experiment from a config file");
  std::string config_path;
  train->add_option("config", config_path, "Experiment config file")->required();

  auto* verify = app.add_subcommand("prop1-verify",
                                 "Check the optimal-discriminator identity on random games");
  std::size_t trials = 1000;
  bool negative = false;
  verify->add_option("--trials", trials, "Number of random games");
  verify->add_flag("--negative-weight", negative,
                   "Sample lambda above 1/(2 alpha) and report the C(G) sign");

  auto* curves = app.add_subcommand("curves", "Write the f-divergence generator curve table");

  auto* divergence = app.add_subcommand("divergence",
                                     "Print divergences between two weight CSVs");
  std::string p_path, q_path;
  divergence->add_option("p_csv", p_path, "Weights of P, one per line")->required();
  divergence->add_option("q_csv", q_path, "Weights of Q, one per line")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(train)) {
      return cmd_train(config_path, seed, out);
    }
    if (app.got_subcommand(verify)) {
      return cmd_prop1_verify(trials, seed.value_or(0), negative);
    }
    if (app.got_subcommand(curves)) {
      return cmd_curves(out.value_or("curves.csv"));
    }
    if (app.got_subcommand(divergence)) {
      return cmd_divergence(p_path, q_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
