#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "pcfi/coherence.hpp"
#include "pcfi/estimation.hpp"
#include "pcfi/examples.hpp"
#include "pcfi/io.hpp"
#include "pcfi/qsd.hpp"
#include "pcfi/sampling.hpp"

namespace pcfi {
namespace cmd {
namespace {

constexpr int kOk = 0;
constexpr int kInvalidInput = 2;
constexpr int kDomainError = 3;

// CSV values carry 6 significant digits; JSON keeps full precision.
std::string sig6(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void print_error(std::ostream& err, const std::string& message, int code) {
  io::json j{{"error", message}, {"code", code}};
  err << j.dump() << "\n";
}

// Runs the body, mapping exceptions to exit codes and error JSON.
template <typename Fn>
int guarded(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    print_error(err, e.what(), kInvalidInput);
    return kInvalidInput;
  } catch (const NumericError& e) {
    print_error(err, e.what(), kDomainError);
    return kDomainError;
  } catch (const std::exception& e) {
    print_error(err, e.what(), kInvalidInput);
    return kInvalidInput;
  }
}

}  // namespace

int run_fisher(const FisherArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const DensityMatrix<double> rho = io::load_density(args.state_path, args.cfg.tol);
    const PioChannel<double> ch = io::load_channel(args.channel_path);
    const OutcomeDistribution<double> dist =
        outcome_distribution(ch, rho, args.eps0, args.cfg.tol);
    const double fi = classical_fi(dist, args.cfg.tol.p_floor);
    if (args.cfg.output_format == "csv") {
      out << "fi," << sig6(fi) << "\n";
      out << "outcome,p,dp\n";
      for (Index k = 0; k < dist.probs.size(); ++k)
        out << k << "," << sig6(dist.probs[k]) << "," << sig6(dist.dprobs[k]) << "\n";
    } else {
      io::json outcomes = io::json::array();
      for (Index k = 0; k < dist.probs.size(); ++k)
        outcomes.push_back(io::json{{"outcome", k}, {"p", dist.probs[k]}, {"dp", dist.dprobs[k]}});
      io::json j{{"fi", fi}, {"eps0", args.eps0}, {"outcomes", outcomes}};
      out << j.dump(2) << "\n";
    }
    return kOk;
  });
}

int run_coherence(const CoherenceArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const DensityMatrix<double> rho = io::load_density(args.state_path, args.cfg.tol);
    CoherenceResult<double> res;
    if (args.mode == "two-qubit") {
      res = coherence_two_qubit(rho, args.cfg.tol);
    } else if (args.mode == "search") {
      res = coherence_search(rho, args.cfg.search, args.cfg.tol);
    } else if (args.mode == "unitary-bound") {
      const Matrix<double> rho_a = partial_trace_b(rho);
      const UnitaryBoundResult<double> ub = unitary_bound_search(rho_a, args.cfg.tol);
      res.value = ub.value;
      res.certificate = sld_measurement_channel(rho_a, ub.generator, args.cfg.tol);
      res.mode = CoherenceMode::unitary_bound;
    } else if (args.mode == "auto") {
      res = (rho.dim_a == 2) ? coherence_two_qubit(rho, args.cfg.tol)
                             : coherence_search(rho, args.cfg.search, args.cfg.tol);
    } else {
      throw ValidationError("coherence: unknown mode '" + args.mode + "'");
    }
    io::save_json_file(args.certificate_out, io::channel_to_json(res.certificate));
    if (args.cfg.output_format == "csv") {
      out << "value,mode,certificate_path\n";
      out << sig6(res.value) << "," << to_string(res.mode) << "," << args.certificate_out << "\n";
    } else {
      io::json j{{"value", res.value},
                 {"mode", to_string(res.mode)},
                 {"certificate_path", args.certificate_out}};
      out << j.dump(2) << "\n";
    }
    return kOk;
  });
}

int run_reproduce(const ReproduceArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    namespace fs = std::filesystem;
    fs::create_directories(args.out_dir);
    const PioChannel<double> ch = examples::reference_channel();
    require_valid_channel(ch);
    const std::vector<std::pair<std::string, DensityMatrix<double>>> states = {
        {"E1", examples::state_1()}, {"E2", examples::state_2()}, {"E3", examples::state_3()}};

    const fs::path examples_csv = fs::path(args.out_dir) / "examples.csv";
    const fs::path fig1_csv = fs::path(args.out_dir) / "fig1.csv";
    std::ofstream ex(examples_csv);
    std::ofstream fig(fig1_csv);
    if (!ex || !fig) throw ValidationError("reproduce: cannot write into " + args.out_dir);
    ex << "label,fi_postselective,unitary_bound_full,unitary_bound_fixed1\n";
    fig << "label,postselective_fi,unitary_max\n";
    for (const auto& [label, rho] : states) {
      const OutcomeDistribution<double> dist = outcome_distribution(ch, rho, 0.0, args.cfg.tol);
      const double fi = classical_fi(dist, args.cfg.tol.p_floor);
      const double full = coherence_unitary_bound(rho, args.cfg.tol);
      const double fixed1 = coherence_unitary_bound_fixed(rho, Index(1), args.cfg.tol);
      ex << label << "," << sig6(fi) << "," << sig6(full) << "," << sig6(fixed1) << "\n";
      fig << label << "," << sig6(fi) << "," << sig6(full) << "\n";
      out << label << ": fi=" << sig6(fi) << " bound_full=" << sig6(full)
          << " bound_fixed1=" << sig6(fixed1) << "\n";
    }
    out << "wrote " << examples_csv.string() << " and " << fig1_csv.string() << "\n";
    return kOk;
  });
}

int run_qsd(const QsdArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const QsdEnsemble<double> ens = io::load_ensemble(args.ensemble_path, args.cfg.tol);
    const double pgm_s = pgm_success(ens, args.cfg.tol);
    const bool two = ens.size() == 2;
    const double hel = two ? helstrom_success(ens, args.cfg.tol) : 0.0;

    double max_dev = 0.0, prior_mismatch = 0.0;
    int strategies = 0;
    if (args.check_equivalence) {
      std::vector<std::vector<Matrix<double>>> povms;
      povms.push_back(pgm(ens, args.cfg.tol));
      Rng rng(args.cfg.seed);
      for (int s = 1; s < args.samples; ++s)
        povms.push_back(random_povm<double>(rng, ens.dim(), ens.size()));
      for (const auto& povm : povms) {
        const EquivalenceReport<double> rep =
            discrimination_equivalence_check(ens, povm, args.cfg.tol);
        max_dev = std::max(max_dev, rep.max_deviation);
        prior_mismatch = std::max(prior_mismatch, rep.prior_mismatch);
        ++strategies;
      }
    }

    if (args.cfg.output_format == "csv") {
      out << "metric,value\n";
      if (two) out << "helstrom," << sig6(hel) << "\n";
      out << "pgm_success," << sig6(pgm_s) << "\n";
      if (args.check_equivalence) {
        out << "equivalence_max_deviation," << sig6(max_dev) << "\n";
        out << "equivalence_prior_mismatch," << sig6(prior_mismatch) << "\n";
        out << "equivalence_strategies," << strategies << "\n";
      }
    } else {
      io::json j{{"pgm_success", pgm_s}};
      j["helstrom"] = two ? io::json(hel) : io::json(nullptr);
      if (args.check_equivalence)
        j["equivalence"] = io::json{{"max_deviation", max_dev},
                                    {"prior_mismatch", prior_mismatch},
                                    {"strategies", strategies}};
      out << j.dump(2) << "\n";
    }
    return kOk;
  });
}

int run_mle(const MleArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const DensityMatrix<double> rho = io::load_density(args.state_path, args.cfg.tol);
    const PioChannel<double> ch = io::load_channel(args.channel_path);
    const MleResult<double> res = mle_simulation(ch, rho, args.eps_true, args.shots, args.trials,
                                                 args.cfg.seed, args.cfg.tol);
    const double ratio = res.variance / res.crb;
    if (args.cfg.output_format == "csv") {
      out << "metric,value\n";
      out << "variance," << sig6(res.variance) << "\n";
      out << "crb," << sig6(res.crb) << "\n";
      out << "ratio," << sig6(ratio) << "\n";
      out << "fi," << sig6(res.fi) << "\n";
      out << "mean," << sig6(res.mean) << "\n";
    } else {
      io::json j{{"variance", res.variance},
                 {"crb", res.crb},
                 {"ratio", ratio},
                 {"fi", res.fi},
                 {"mean", res.mean},
                 {"shots", args.shots},
                 {"trials", args.trials},
                 {"seed", args.cfg.seed}};
      out << j.dump(2) << "\n";
    }
    return kOk;
  });
}

}  // namespace cmd
}  // namespace pcfi
