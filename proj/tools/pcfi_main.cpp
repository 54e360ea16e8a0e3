// Command-line front end: argument parsing and config resolution only; the
// actual work lives in src/commands.cpp.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "pcfi/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "pcfi — partial-coherence Fisher information toolkit.\n"
      "Config precedence: defaults < PCFI_CONFIG file < --config file < flags.\n"
      "CSV output carries 6 significant digits; JSON keeps full precision."};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key=value config file (overrides PCFI_CONFIG)");
  std::string output_format;
  auto* fmt_opt = app.add_option("--output-format", output_format, "json or csv")
                      ->check(CLI::IsMember({"json", "csv"}));
  std::uint64_t seed = 0;
  auto* seed_opt =
      app.add_option("--seed", seed, "seed for every random draw (also the search seed)");

  pcfi::cmd::FisherArgs fisher;
  auto* cmd_fisher = app.add_subcommand(
      "fisher",
      "Classical Fisher information of a state under a parametrization channel.\n"
      "CSV columns: 'fi,<value>' header line, then 'outcome,p,dp' rows.");
  cmd_fisher->add_option("state", fisher.state_path, "density JSON file")->required();
  cmd_fisher->add_option("channel", fisher.channel_path, "channel JSON file")->required();
  cmd_fisher->add_option("--eps0", fisher.eps0, "evaluation point of the parameter");

  pcfi::cmd::CoherenceArgs coherence;
  auto* cmd_coherence = app.add_subcommand(
      "coherence",
      "Partial-coherence measure of a bipartite state.\n"
      "CSV columns: value,mode,certificate_path.");
  cmd_coherence->add_option("state", coherence.state_path, "density JSON file")->required();
  cmd_coherence
      ->add_option("--mode", coherence.mode,
                   "auto | two-qubit | search | unitary-bound (auto picks two-qubit when "
                   "dim_a = 2, else search)")
      ->check(CLI::IsMember({"auto", "two-qubit", "search", "unitary-bound"}));
  cmd_coherence->add_option("--certificate-out", coherence.certificate_out,
                            "where to write the certificate channel JSON");

  pcfi::cmd::ReproduceArgs reproduce;
  auto* cmd_reproduce = app.add_subcommand(
      "reproduce-examples",
      "Recompute the bundled three-level examples.\n"
      "Writes examples.csv (label,fi_postselective,unitary_bound_full,unitary_bound_fixed1)\n"
      "and fig1.csv (label,postselective_fi,unitary_max).");
  cmd_reproduce->add_option("--out", reproduce.out_dir, "output directory");

  pcfi::cmd::QsdArgs qsd;
  auto* cmd_qsd = app.add_subcommand(
      "qsd",
      "State-discrimination bounds for an ensemble.\n"
      "CSV columns: metric,value (helstrom, pgm_success, equivalence_*).");
  cmd_qsd->add_option("ensemble", qsd.ensemble_path, "ensemble JSON file")->required();
  cmd_qsd->add_flag("--check-equivalence", qsd.check_equivalence,
                    "verify the embedded-state success probabilities match the originals");
  cmd_qsd->add_option("--samples", qsd.samples,
                      "strategies exercised by the check: the pretty-good measurement plus "
                      "samples-1 random POVMs");

  pcfi::cmd::MleArgs mle;
  auto* cmd_mle = app.add_subcommand(
      "mle",
      "Maximum-likelihood estimation experiment against the Cramer-Rao bound.\n"
      "CSV columns: metric,value (variance, crb, ratio, fi, mean).");
  cmd_mle->add_option("state", mle.state_path, "density JSON file")->required();
  cmd_mle->add_option("channel", mle.channel_path, "channel JSON file")->required();
  cmd_mle->add_option("--eps-true", mle.eps_true, "true parameter value");
  cmd_mle->add_option("--shots", mle.shots, "measurement shots per trial")
      ->check(CLI::PositiveNumber);
  cmd_mle->add_option("--trials", mle.trials, "independent trials")->check(CLI::PositiveNumber);

  // Accept the global flags before or after the subcommand name.
  for (CLI::App* sub : {cmd_fisher, cmd_coherence, cmd_reproduce, cmd_qsd, cmd_mle})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  pcfi::RunConfig cfg;
  try {
    cfg = pcfi::resolve_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"" << e.what() << "\",\"code\":2}\n";
    return 2;
  }
  if (fmt_opt->count() > 0) cfg.output_format = output_format;
  if (seed_opt->count() > 0) {
    cfg.seed = seed;
    cfg.search.seed = seed;
  }

  if (cmd_fisher->parsed()) {
    fisher.cfg = cfg;
    return pcfi::cmd::run_fisher(fisher, std::cout, std::cerr);
  }
  if (cmd_coherence->parsed()) {
    coherence.cfg = cfg;
    return pcfi::cmd::run_coherence(coherence, std::cout, std::cerr);
  }
  if (cmd_reproduce->parsed()) {
    reproduce.cfg = cfg;
    return pcfi::cmd::run_reproduce(reproduce, std::cout, std::cerr);
  }
  if (cmd_qsd->parsed()) {
    qsd.cfg = cfg;
    return pcfi::cmd::run_qsd(qsd, std::cout, std::cerr);
  }
  if (cmd_mle->parsed()) {
    mle.cfg = cfg;
    return pcfi::cmd::run_mle(mle, std::cout, std::cerr);
  }
  return 2;
}
