#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "pcfi/config.hpp"

// Command implementations behind the CLI. Each takes parsed arguments plus
// the output/error streams and returns the process exit code: 0 success,
// 2 input validation failure, 3 domain error. Failures print a one-line
// machine-readable error JSON to the error stream.
namespace pcfi {
namespace cmd {

struct FisherArgs {
  std::string state_path;
  std::string channel_path;
  double eps0 = 0.0;
  RunConfig cfg;
};
int run_fisher(const FisherArgs& args, std::ostream& out, std::ostream& err);

struct CoherenceArgs {
  std::string state_path;
  std::string mode = "auto";  // auto | two-qubit | search | unitary-bound
  std::string certificate_out = "certificate.json";
  RunConfig cfg;
};
int run_coherence(const CoherenceArgs& args, std::ostream& out, std::ostream& err);

struct ReproduceArgs {
  std::string out_dir = ".";
  RunConfig cfg;
};
int run_reproduce(const ReproduceArgs& args, std::ostream& out, std::ostream& err);

struct QsdArgs {
  std::string ensemble_path;
  bool check_equivalence = false;
  int samples = 1;  // random strategies exercised by the equivalence check
  RunConfig cfg;
};
int run_qsd(const QsdArgs& args, std::ostream& out, std::ostream& err);

struct MleArgs {
  std::string state_path;
  std::string channel_path;
  double eps_true = 0.0;
  std::int64_t shots = 10000;
  int trials = 200;
  RunConfig cfg;
};
int run_mle(const MleArgs& args, std::ostream& out, std::ostream& err);

}  // namespace cmd
}  // namespace pcfi
