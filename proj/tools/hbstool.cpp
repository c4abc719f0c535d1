// Command-line experiment harness: compress / solve / encode / exp3d
// subcommands over a key=value config file, emitting CSV result tables.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hbs/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool no_proxy = false;
  double t = -1;
  double alpha = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "configuration file")->required();
  cmd->add_option("--out", args.out, "output directory (overrides config)");
  cmd->add_option("--seed", args.seed, "random seed (overrides config)");
  cmd->add_flag("--no-proxy", args.no_proxy, "disable proxy compression");
  cmd->add_option("--t", args.t, "auxiliary scaling parameter in (0,1]");
  cmd->add_option("--alpha", args.alpha, "Tikhonov regularization parameter");
}

hbs::ExperimentConfig load(const CommonArgs& args, const std::string& experiment) {
  hbs::ExperimentConfig cfg = hbs::ExperimentConfig::parse_file(args.config);
  cfg.experiment = experiment;
  if (!args.out.empty()) cfg.out_dir = args.out;
  if (args.seed_set) cfg.seed = args.seed;
  if (args.no_proxy) cfg.proxy = false;
  if (args.t > 0) cfg.t = args.t;
  if (args.alpha > 0) cfg.alpha_tik = args.alpha;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HBS compression, extended sparsification and block-encoding experiments"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* compress = app.add_subcommand("compress", "nonzero counts and compression timing");
  CLI::App* solve = app.add_subcommand("solve", "extended solve vs dense reference");
  CLI::App* encode = app.add_subcommand("encode", "subnormalization predictions");
  CLI::App* exp3d = app.add_subcommand("exp3d", "3D sphere nonzero scaling");
  for (CLI::App* cmd : {compress, solve, encode, exp3d}) add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);
  args.seed_set = (compress->count("--seed") + solve->count("--seed") + encode->count("--seed") +
                   exp3d->count("--seed")) > 0;

  try {
    if (compress->parsed()) hbs::run_compress(load(args, "compress"));
    if (solve->parsed()) hbs::run_solve(load(args, "solve"));
    if (encode->parsed()) hbs::run_encode(load(args, "encode"));
    if (exp3d->parsed()) hbs::run_3d(load(args, "exp3d"));
  } catch (const hbs::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "numerical failure: " << ex.what() << '\n';
    return 3;
  }
  return 0;
}
