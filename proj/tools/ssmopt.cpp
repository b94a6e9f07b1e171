// Command-line front end: run / compare / analyze / flow.
//
// Exit codes: 0 success, 1 invalid input (parse or validation), 2 runtime failure.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssmopt/analysis.hpp"
#include "ssmopt/harness.hpp"
#include "ssmopt/kernels.hpp"

namespace {

using namespace ssmopt;

int print_reports(const std::vector<RunReport>& reports, const std::filesystem::path& out_dir) {
  int failures = 0;
  for (const auto& r : reports) {
    if (r.error) {
      ++failures;
      std::fprintf(stderr, "%s failed: %s\n", r.name.c_str(), r.error->c_str());
    }
  }
  std::printf("wrote %zu run(s) to %s\n", reports.size(), out_dir.string().c_str());
  return failures == 0 ? 0 : 2;
}

nlohmann::json complex_list(const std::vector<Complex>& v) {
  auto arr = nlohmann::json::array();
  for (const auto& z : v) arr.push_back({z.real(), z.imag()});
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"State-space adaptive gradient optimizers"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every configured optimizer; write trajectories and reports.json");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();

  auto* compare = app.add_subcommand("compare", "As run, plus summary.csv and summary.json ranked by best f");
  compare->add_option("config", config_path, "Experiment config (JSON)")->required();

  double b2 = 0, b3 = 0;
  auto* analyze = app.add_subcommand("analyze", "Poles, zeros, p and DC gain of the AdamSSM second-moment filter");
  analyze->add_option("--b2", b2, "Continuous rate b2")->required();
  analyze->add_option("--b3", b3, "Continuous rate b3")->required();

  double dt = 0, t_end = 0;
  std::string method = "rk4";
  auto* flow = app.add_subcommand("flow", "Integrate the continuous flow of each configured optimizer");
  flow->add_option("config", config_path, "Experiment config (JSON)")->required();
  flow->add_option("--dt", dt, "Step size")->required();
  flow->add_option("--t-end", t_end, "Final time")->required();
  flow->add_option("--method", method, "Integrator")->check(CLI::IsMember({"rk4", "euler"}));

  std::string isa;
  app.add_option("--isa", isa, "Kernel variant (scalar, avx2); default picks the best supported")
      ->check(CLI::IsMember({"scalar", "avx2"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (!isa.empty()) kernels::set_active_isa(isa == "avx2" ? kernels::Isa::kAvx2 : kernels::Isa::kScalar);

    if (*analyze) {
      if (!(b2 > 0) || !(b3 >= 0)) {
        std::fprintf(stderr, "analyze: need b2 > 0 and b3 >= 0\n");
        return 1;
      }
      const RationalTF tf = adamssm_tf(b2, b3);
      const PolesZeros pz = poles_zeros(tf);
      nlohmann::json out;
      out["poles"] = complex_list(pz.poles);
      out["zeros"] = complex_list(pz.zeros);
      out["p"] = stability_quantity_p(SecondMomentLTI{b2, b3, b2 + b3});
      out["dc_gain"] = tf.dc_gain();
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    const ExperimentConfig cfg = load_config(config_path);
    const auto out_dir = output_dir_for(cfg);
    if (*run) return print_reports(run_experiment(cfg, out_dir), out_dir);
    if (*compare) return print_reports(run_compare(cfg, out_dir), out_dir);
    if (*flow) {
      const FlowMethod m = method == "euler" ? FlowMethod::kEuler : FlowMethod::kReference;
      return print_reports(run_flows(cfg, dt, t_end, m, out_dir), out_dir);
    }
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
