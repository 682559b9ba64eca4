/*
 * Copyright 2026 The capsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CAPSIM_CLI_HPP_
#define CAPSIM_CLI_HPP_

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "capsim/checker.hpp"
#include "capsim/harness.hpp"
#include "capsim/partition.hpp"
#include "capsim/scenario.hpp"
#include "capsim/trace.hpp"

namespace capsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

namespace detail {

inline std::vector<Tick> parse_tick_list(const std::string& text) {
  std::vector<Tick> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad tick '" + item + "' in list");
    }
    if (used != item.size()) throw ConfigError("bad tick '" + item + "' in list");
    out.push_back(Tick{v});
  }
  return out;
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError("'" + path + "': " + ex.what());
  }
}

template <class F>
void with_output(const std::string& path, std::ostream& fallback, F&& f) {
  if (path.empty()) {
    f(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path + "'");
  f(file);
}

}  // namespace detail

/**
 * Command-line entry point.
 *
 *   simulate <config> [-o trace]
 *   check <trace> --tc N --ta M [--tp K [--slack S]] [--anchor response|invoke]
 *   prove <spec>
 *   frontier <config> --tp N --deadlines a,b,c [-o csv] [--anchor invoke|response]
 *   tp <config>
 *
 * Exit codes: 0 success, 1 unexpected result (violations for check, bound
 * failure for frontier, no contradiction for prove), 2 bad input.
 */
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"capsim: consistency/availability/partition simulator and checker"};
  app.require_subcommand(1);

  std::string sim_config, sim_out;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its JSON-lines trace");
  simulate->add_option("config", sim_config, "Scenario config (JSON)")->required();
  simulate->add_option("-o,--output", sim_out, "Trace output path (default stdout)");

  std::string chk_trace, chk_anchor = "response";
  std::uint64_t chk_tc = 0, chk_ta = 0, chk_slack = 0;
  std::optional<std::uint64_t> chk_tp;
  auto* checkc = app.add_subcommand("check", "Check a trace against declared tc/ta bounds");
  checkc->add_option("trace", chk_trace, "Trace file (JSON lines)")->required();
  checkc->add_option("--tc", chk_tc, "Declared consistency bound")->required();
  checkc->add_option("--ta", chk_ta, "Declared availability bound")->required();
  checkc->add_option("--tp", chk_tp, "Partition bound to test tc + ta >= tp - slack against");
  checkc->add_option("--slack", chk_slack, "Slack for the --tp bound check");
  checkc->add_option("--anchor", chk_anchor, "Staleness reference: response or invoke")
      ->check(CLI::IsMember({"response", "invoke"}));

  std::string prove_spec;
  auto* prove = app.add_subcommand("prove", "Replay the partition contradiction for a claimed (tc, ta)");
  prove->add_option("spec", prove_spec, "Proof replay spec (JSON)")->required();

  std::string fr_config, fr_out, fr_deadlines, fr_anchor = "invoke";
  std::uint64_t fr_tp = 0;
  auto* frontier = app.add_subcommand("frontier", "Sweep HybridDeadline deadlines across a partition");
  frontier->add_option("config", fr_config, "Base scenario config (JSON)")->required();
  frontier->add_option("--tp", fr_tp, "Partition length")->required();
  frontier->add_option("--deadlines", fr_deadlines, "Comma-separated deadlines")->required();
  frontier->add_option("-o,--output", fr_out, "CSV output path (default stdout)");
  frontier->add_option("--anchor", fr_anchor, "Staleness reference: invoke or response")
      ->check(CLI::IsMember({"response", "invoke"}));

  std::string tp_config;
  auto* tpc = app.add_subcommand("tp", "Print the partition bound of a scenario's schedule");
  tpc->add_option("config", tp_config, "Scenario config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n" << app.help();
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) {
      const auto config = load_scenario(sim_config);
      const auto trace = run(config);
      detail::with_output(sim_out, out, [&](std::ostream& os) { write_jsonl(os, trace); });
      return kExitOk;
    }

    if (checkc->parsed()) {
      std::ifstream in(chk_trace);
      if (!in) throw ConfigError("cannot open trace '" + chk_trace + "'");
      const auto history = extract_history(read_jsonl(in));
      const Anchor anchor = chk_anchor == "invoke" ? Anchor::kInvoke : Anchor::kResponse;
      const auto report = check(history, Tick{chk_tc}, Tick{chk_ta}, {anchor});
      out << to_json(report) << "\n";
      bool ok = report.clean();
      if (chk_tp) {
        const auto bound = check_bound(report, Tick{*chk_tp}, Tick{chk_slack});
        err << "bound tc + ta >= tp - slack: " << (bound.holds ? "holds" : "violated")
            << (bound.unavailable ? " (some request never answered)" : "") << "\n";
        ok = ok && bound.holds;
      }
      return ok ? kExitOk : kExitViolation;
    }

    if (prove->parsed()) {
      const auto spec = proof_spec_from_json(detail::load_json(prove_spec));
      const auto outcome = proof_replay_run(spec);
      out << to_json(outcome.report) << "\n";
      err << spec.strategy.describe() << " claimed (tc=" << spec.claimed_tc << ", ta=" << spec.claimed_ta
          << ") under tp=" << spec.tp << ": "
          << (outcome.contradiction_found() ? "refuted" : "NOT refuted") << "\n";
      return outcome.contradiction_found() ? kExitOk : kExitViolation;
    }

    if (frontier->parsed()) {
      const auto base = load_scenario(fr_config);
      const auto deadlines = detail::parse_tick_list(fr_deadlines);
      FrontierOptions options;
      options.anchor = fr_anchor == "response" ? Anchor::kResponse : Anchor::kInvoke;
      const auto rows = frontier_sweep(Tick{fr_tp}, deadlines, base, options);
      detail::with_output(fr_out, out, [&](std::ostream& os) { write_frontier_csv(os, rows); });
      const bool all_ok = std::all_of(rows.begin(), rows.end(),
                                      [](const FrontierRow& r) { return r.bound_satisfied; });
      return all_ok ? kExitOk : kExitViolation;
    }

    if (tpc->parsed()) {
      const auto config = load_scenario(tp_config);
      out << compute_tp(config.partitions, config.horizon, config.reachability).value << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const TraceParseError& ex) {
    err << "parse error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const IntegrityError& ex) {
    err << "integrity error: " << ex.what() << "\n";
    return kExitViolation;
  } catch (const SimulationError& ex) {
    err << "simulation error: " << ex.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace capsim

#endif  // CAPSIM_CLI_HPP_
