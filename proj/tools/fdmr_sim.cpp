// Campaign runner: one config file plus flag overrides, optionally swept over
// schedulers and cancellation levels.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "fdmr/sim.hpp"

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex multi-cell scheduler simulator"};
  std::string config_path, scenario, schedulers, cancellations, traffic, out;
  int drops = 0, slots = 0, messages = -1;
  long long seed = -1;
  bool parallel = false;
  app.add_option("-c,--config", config_path, "key = value config file");
  app.add_option("--scenario", scenario, "indoor | outdoor");
  app.add_option("--scheduler", schedulers, "DFDMR,CFDMR,HDSync,DynTDD,RR-HD,RR-FD (comma list)");
  app.add_option("--cancellation", cancellations, "self-interference cancellation in dB or inf (comma list)");
  app.add_option("--drops", drops, "number of drops");
  app.add_option("--slots", slots, "slots per drop");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--traffic", traffic, "full | ftp");
  app.add_option("--out", out, "output directory");
  app.add_option("--messages", messages, "keep up to N protocol messages of drop 0");
  app.add_flag("--parallel", parallel, "run drops on all OpenMP threads");
  CLI11_PARSE(app, argc, argv);

  fdmr::ScenarioConfig base;
  std::vector<fdmr::ScenarioConfig> grid;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw std::invalid_argument("cannot open config " + config_path);
      std::stringstream text;
      text << f.rdbuf();
      fdmr::apply_config_text(base, text.str());
    }
    if (!scenario.empty()) base.scenario = fdmr::parse_scenario(scenario);
    if (!traffic.empty()) base.traffic.kind = fdmr::parse_traffic(traffic);
    if (drops > 0) base.drops = drops;
    if (slots > 0) base.slots = slots;
    if (seed >= 0) base.seed = static_cast<std::uint64_t>(seed);
    if (!out.empty()) base.out_dir = out;
    if (messages >= 0) base.message_log_limit = messages;
    if (parallel) base.policy = fdmr::ExecPolicy::Parallel;

    const auto sched_list = schedulers.empty() ? std::vector<std::string>{fdmr::to_string(base.scheduler)}
                                               : split(schedulers);
    const auto cancel_list = cancellations.empty()
                                 ? std::vector<std::string>{fdmr::cancellation_label(base.cancellation_db)}
                                 : split(cancellations);
    for (const auto& s : sched_list) {
      for (const auto& c : cancel_list) {
        auto cfg = base;
        cfg.scheduler = fdmr::parse_scheduler(s);
        if (!fdmr::is_full_duplex(cfg.scheduler) && &c != &cancel_list.front()) continue;
        cfg.cancellation_db = fdmr::parse_cancellation(c);
        cfg.validate();
        grid.push_back(cfg);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  std::vector<fdmr::CampaignResult> runs;
  for (const auto& cfg : grid) {
    runs.push_back(fdmr::run_campaign(cfg));
    const auto& r = runs.back().report;
    std::cout << r.label << "  dl " << r.mean_dl_mbps << " Mbps  ul " << r.mean_ul_mbps
              << " Mbps  fd " << 100 * r.fd_share << "%  rounds " << r.mean_rounds;
    if (r.failed_drops) std::cout << "  failed drops " << r.failed_drops;
    std::cout << '\n';
  }
  try {
    fdmr::write_outputs(base.out_dir, runs);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
