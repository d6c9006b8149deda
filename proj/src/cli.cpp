/*
 * Copyright 2026 The accelplug Authors.
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

#include "accelplug/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "accelplug/algo_template.hpp"
#include "accelplug/balancer.hpp"
#include "accelplug/generators.hpp"
#include "accelplug/graph_store.hpp"
#include "accelplug/pipeline.hpp"
#include "accelplug/upper_system.hpp"

namespace accelplug {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename T>
std::string list(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += num(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

double parse_number(std::string_view text, const char* what) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ConfigError(std::string("bad ") + what + " '" + s + "'");
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  return f;
}

struct RunOptions {
  std::string algo;
  std::string graph;
  int partitions = 1;
  int daemons_per_node = 1;
  std::string daemon_profile = "cpu-like";
  std::string model = "bsp";
  std::string block_size = "auto";
  bool enable_cache = false;
  std::size_t cache_capacity = 1024;
  bool enable_skip = false;
  std::string balance = "none";
  std::uint64_t seed = 1;
  std::string metrics_out;
  std::string dump_out;
  double download_cost = 0.01;
  double upload_cost = 0.01;
  int max_iterations = 0;
  std::vector<VertexId> sssp_sources;
  std::vector<double> node_unit_costs;
};

// c_j per vertex from three one-iteration PageRank passes at different block
// sizes on the even partition.
std::vector<double> calibrate_nodes(const EdgeList& graph, const std::vector<std::int64_t>& sizes,
                                    const EngineConfig& base, std::ostream& err) {
  const std::size_t m = sizes.size();
  auto pr = make_algorithm(AlgorithmKind::PageRank, graph.vertices, AlgorithmParams{{}, 1});
  const PartitionedGraph pg = partition_graph(graph, sizes);
  std::size_t max_edges = 1;
  for (const auto& p : pg.partitions) max_edges = std::max(max_edges, p.edges().size());

  std::vector<std::vector<CostSample>> samples(m);
  for (std::size_t parts : {2u, 4u, 8u}) {
    EngineConfig cfg = base;
    cfg.enable_cache = false;
    cfg.enable_skip = false;
    cfg.block_size = std::max<std::size_t>(1, (max_edges + parts - 1) / parts);
    const RunResult r = run(pg, pr, cfg);
    const IterationMetrics& it = r.metrics.iterations.front();
    for (std::size_t j = 0; j < m; ++j) {
      samples[j].push_back(CostSample{static_cast<double>(sizes[j]),
                                      static_cast<double>(it.node_blocks[j]), it.node_time[j]});
    }
  }
  std::vector<double> costs(m);
  for (std::size_t j = 0; j < m; ++j) {
    try {
      const CostFit fit = calibrate(samples[j]);
      if (!(fit.c > 0.0) || !std::isfinite(fit.c)) throw ConfigError("non-positive fit");
      costs[j] = fit.c;
      err << "calibrate: node " << j << " c=" << num(fit.c);
      if (fit.t_call) err << " t_call=" << num(*fit.t_call);
      err << '\n';
    } catch (const ConfigError& e) {
      costs[j] = base.node_daemons[j].front().per_unit_cost;
      err << "calibrate: node " << j << " fit failed (" << e.what()
          << "), using per_unit_cost " << num(costs[j]) << '\n';
    }
  }
  return costs;
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  if (o.partitions < 1) throw ConfigError("--partitions must be at least 1");
  if (o.daemons_per_node < 1) throw ConfigError("--daemons-per-node must be at least 1");
  const AlgorithmKind kind = parse_algorithm_kind(o.algo);
  const ComputationModel model = parse_model(o.model);
  const AcceleratorProfile profile = parse_profile(o.daemon_profile);
  const auto block_size = parse_block_size(o.block_size);
  if (o.balance != "none" && o.balance != "data" && o.balance != "capacity") {
    throw ConfigError("--balance must be none, data or capacity");
  }
  const auto m = static_cast<std::size_t>(o.partitions);
  if (!o.node_unit_costs.empty() && o.node_unit_costs.size() != m) {
    throw ConfigError("--node-unit-costs needs one value per partition");
  }

  const EdgeList graph = load_edge_list(o.graph);

  EngineConfig cfg;
  cfg.model = model;
  cfg.block_size = block_size;
  cfg.download_cost = o.download_cost;
  cfg.upload_cost = o.upload_cost;
  cfg.enable_cache = o.enable_cache;
  cfg.cache_capacity = o.cache_capacity;
  cfg.enable_skip = o.enable_skip;
  std::vector<double> unit_costs(m, profile.per_unit_cost);
  if (!o.node_unit_costs.empty()) unit_costs = o.node_unit_costs;
  for (std::size_t j = 0; j < m; ++j) {
    AcceleratorProfile p = profile;
    p.per_unit_cost = unit_costs[j];
    p.validate();
    cfg.node_daemons.emplace_back(static_cast<std::size_t>(o.daemons_per_node), p);
  }

  std::vector<std::int64_t> sizes = even_sizes(graph.vertices.size(), m);
  if (o.balance == "data") {
    const auto costs = calibrate_nodes(graph, sizes, cfg, err);
    sizes = balance_data(static_cast<std::int64_t>(graph.vertices.size()), costs);
    err << "balance data: sizes=" << list(sizes) << '\n';
  } else if (o.balance == "capacity") {
    for (double c : unit_costs) {
      if (!(c > 0.0)) throw ConfigError("capacity balancing needs positive per_unit_cost");
    }
    double f = 0.0;
    for (double c : unit_costs) f = std::max(f, 1.0 / c);
    const auto factors = balance_capacity(f, sizes, unit_costs);
    for (std::size_t j = 0; j < m; ++j) {
      const double wanted = factors[j] * unit_costs[j] * o.daemons_per_node;
      const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(wanted - 1e-9)));
      cfg.node_daemons[j].resize(count, cfg.node_daemons[j].front());
      err << "balance capacity: node " << j << " factor=" << num(factors[j])
          << " daemons=" << count << " overshoot=" << num(static_cast<double>(count) - wanted)
          << '\n';
    }
  }

  AlgorithmParams params;
  params.sssp_sources = o.sssp_sources;
  params.max_iterations = o.max_iterations;
  auto algorithm = make_algorithm(kind, graph.vertices, params);
  const RunResult result = run(partition_graph(graph, sizes), algorithm, cfg);

  if (!o.metrics_out.empty()) {
    auto f = open_out(o.metrics_out);
    f << to_records(result.metrics);
  }
  if (!o.dump_out.empty()) {
    auto f = open_out(o.dump_out);
    write_dump(f, result.attributes);
  }
  out << "algo=" << to_string(kind) << " model=" << to_string(model) << " partitions=" << m
      << " seed=" << o.seed << " iterations=" << result.metrics.iterations.size()
      << " converged=" << (result.converged ? 1 : 0)
      << " iterations_skipped=" << result.metrics.skipped_rounds
      << " sim_time=" << num(result.metrics.sim_time) << '\n';
  return result.converged ? 0 : 2;
}

int cmd_plan_block(const PipelineCostModel& model, std::ostream& out) {
  model.validate();
  try {
    const BlockSizeOptimum opt = optimal_block_size(model);
    const char* which = opt.which == OptimumCase::DownloadBound ? "download-bound"
                        : opt.which == OptimumCase::UploadBound ? "upload-bound"
                                                                : "balanced";
    out << "closed_form case=" << which << " q=" << num(opt.q) << " b_opt=" << num(opt.b_opt)
        << " t_min=" << num(opt.t_min) << '\n';
    const BlockPlan plan = integerize(model, opt.b_opt);
    out << "integerized s=" << plan.s << " b=" << plan.b << " t=" << num(plan.t) << '\n';
    const BlockPlan brute = sweep_block_count(model);
    out << "brute_force s=" << brute.s << " b=" << brute.b << " t=" << num(brute.t) << '\n';
    out << "relative_gap=" << num((plan.t - brute.t) / brute.t) << '\n';
  } catch (const NoInteriorOptimum& e) {
    out << "closed_form none (" << e.what() << ")\n";
    const BlockPlan brute = sweep_block_count(model);
    out << "brute_force s=" << brute.s << " b=" << brute.b << " t=" << num(brute.t) << '\n';
  }
  return 0;
}

int cmd_plan_balance(const std::string& mode, const std::vector<double>& costs, std::int64_t total,
                     double f, const std::vector<std::int64_t>& sizes, std::ostream& out) {
  if (mode == "data") {
    if (costs.empty()) throw ConfigError("data mode needs --costs");
    const auto plan = balance_data(total, costs);
    const auto even = even_sizes(static_cast<std::size_t>(std::max<std::int64_t>(total, 0)),
                                 costs.size());
    double inv = 0.0;
    for (double c : costs) inv += 1.0 / c;
    out << "plan=" << list(plan) << '\n';
    out << "balanced_makespan=" << num(makespan(plan, costs)) << '\n';
    out << "even_makespan=" << num(makespan(even, costs)) << '\n';
    out << "optimum_makespan=" << num(static_cast<double>(total) / inv) << '\n';
    return 0;
  }
  if (mode == "capacity") {
    if (sizes.empty()) throw ConfigError("capacity mode needs --sizes");
    const auto factors = balance_capacity(f, sizes, costs);
    const auto d_star = *std::max_element(sizes.begin(), sizes.end());
    out << "factors=" << list(factors) << '\n';
    out << "makespan=" << num(static_cast<double>(d_star) / f) << '\n';
    if (!costs.empty()) out << "current_makespan=" << num(makespan(sizes, costs)) << '\n';
    return 0;
  }
  throw ConfigError("--mode must be data or capacity");
}

}  // namespace

AcceleratorProfile parse_profile(std::string_view text) {
  if (text == "cpu-like") return AcceleratorProfile::cpu_like();
  if (text == "gpu-like") return AcceleratorProfile::gpu_like();
  constexpr std::string_view prefix = "custom:";
  if (text.substr(0, prefix.size()) == prefix) {
    std::vector<std::string> parts;
    std::stringstream ss{std::string(text.substr(prefix.size()))};
    for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("custom profile is custom:lanes,per_unit_cost,call_overhead");
    const double lanes = parse_number(parts[0], "lane count");
    if (lanes < 1 || lanes != std::floor(lanes) || lanes > 1e6) {
      throw ConfigError("lane count must be a positive integer");
    }
    AcceleratorProfile p{static_cast<unsigned>(lanes), parse_number(parts[1], "per_unit_cost"),
                         parse_number(parts[2], "call_overhead")};
    p.validate();
    return p;
  }
  throw ConfigError("unknown daemon profile '" + std::string(text) + "'");
}

std::optional<std::size_t> parse_block_size(std::string_view text) {
  if (text == "auto") return std::nullopt;
  const double v = parse_number(text, "block size");
  if (v < 1 || v != std::floor(v)) throw ConfigError("block size must be a positive integer or auto");
  return static_cast<std::size_t>(v);
}

void write_dump(std::ostream& out, const std::map<VertexId, AttributeValue>& attributes) {
  for (const auto& [id, attr] : attributes) out << id << ' ' << format_attribute(attr) << '\n';
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Replaces "--config FILE" with the file's key = value pairs; options given
// on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    std::size_t used = 0;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file");
      path = args[i + 1];
      used = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      used = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + used));
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::vector<std::string> extra;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';' || t[0] == '[') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(no) + ": expected key = value");
      std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      while (!key.empty() && key[0] == '-') key.erase(0, 1);
      const std::string flag = "--" + key;
      if (has_flag(args, flag)) continue;
      if (value == "true") {
        extra.push_back(flag);
      } else if (value != "false") {
        extra.push_back(flag);
        extra.push_back(value);
      }
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(i), extra.begin(), extra.end());
    break;
  }
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  CLI::App app{"accelplug: accelerator middleware for a partitioned graph engine", "accelplug"};
  app.require_subcommand(1);

  RunOptions ro;
  auto* run_cmd = app.add_subcommand("run", "run an algorithm on a graph");
  std::string config_file;  // consumed by expand_config; listed for --help
  run_cmd->add_option("--config", config_file, "key = value file supplying the same options");
  run_cmd->add_option("--algo", ro.algo, "sssp | pagerank | lp")->required();
  run_cmd->add_option("--graph", ro.graph, "edge-list file")->required();
  run_cmd->add_option("--partitions", ro.partitions, "number of nodes");
  run_cmd->add_option("--daemons-per-node", ro.daemons_per_node);
  run_cmd->add_option("--daemon-profile", ro.daemon_profile,
                      "cpu-like | gpu-like | custom:lanes,per_unit_cost,call_overhead");
  run_cmd->add_option("--model", ro.model, "bsp | gas");
  run_cmd->add_option("--block-size", ro.block_size, "auto | N");
  run_cmd->add_flag("--enable-cache", ro.enable_cache);
  run_cmd->add_option("--cache-capacity", ro.cache_capacity);
  run_cmd->add_flag("--enable-skip", ro.enable_skip);
  run_cmd->add_option("--balance", ro.balance, "none | data | capacity");
  run_cmd->add_option("--seed", ro.seed);
  run_cmd->add_option("--metrics-out", ro.metrics_out);
  run_cmd->add_option("--dump-out", ro.dump_out);
  run_cmd->add_option("--download-cost", ro.download_cost, "simulated time per item moved in");
  run_cmd->add_option("--upload-cost", ro.upload_cost, "simulated time per item moved out");
  run_cmd->add_option("--max-iterations", ro.max_iterations, "0 keeps the algorithm default");
  run_cmd->add_option("--sssp-sources", ro.sssp_sources)->delimiter(',');
  run_cmd->add_option("--node-unit-costs", ro.node_unit_costs, "per-node per_unit_cost")
      ->delimiter(',');

  PipelineCostModel pm;
  auto* plan_block = app.add_subcommand("plan-block", "optimal pipeline block size");
  plan_block->add_option("--k1", pm.k1)->required();
  plan_block->add_option("--k2", pm.k2)->required();
  plan_block->add_option("--k3", pm.k3)->required();
  plan_block->add_option("--a", pm.a)->required();
  plan_block->add_option("--d", pm.d)->required();

  std::string mode;
  std::vector<double> costs;
  std::int64_t total = 0;
  double f = 1.0;
  std::vector<std::int64_t> sizes;
  auto* plan_balance = app.add_subcommand("plan-balance", "workload balancing plans");
  plan_balance->add_option("--mode", mode, "data | capacity")->required();
  plan_balance->add_option("--costs", costs)->delimiter(',');
  plan_balance->add_option("--total", total);
  plan_balance->add_option("--f", f);
  plan_balance->add_option("--sizes", sizes)->delimiter(',');

  GraphSpec gs;
  std::string kind;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-graph", "write a generated edge list");
  gen->add_option("--kind", kind, "path | cycle | star | components | random")->required();
  gen->add_option("--n", gs.n)->required();
  gen->add_option("--k", gs.k, "component count");
  gen->add_option("--p", gs.p, "extra-edge probability");
  gen->add_option("--seed", gs.seed);
  gen->add_option("--out", gen_out, "output file (stdout when omitted)");
  gen->add_flag("--weighted", gs.weighted);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 1;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(ro, out, err);
    if (plan_block->parsed()) return cmd_plan_block(pm, out);
    if (plan_balance->parsed()) return cmd_plan_balance(mode, costs, total, f, sizes, out);
    if (gen->parsed()) {
      gs.kind = parse_graph_kind(kind);
      const EdgeList g = generate_graph(gs);
      if (gen_out.empty()) {
        write_edge_list(out, g);
      } else {
        auto file = open_out(gen_out);
        write_edge_list(file, g);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace accelplug
