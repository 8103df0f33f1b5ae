// Command-line front end: embed / network / realize / verify.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hetbook/book.hpp"
#include "hetbook/ccn.hpp"
#include "hetbook/graph.hpp"
#include "hetbook/io.hpp"
#include "hetbook/realize.hpp"
#include "hetbook/svg.hpp"

namespace fs = std::filesystem;
using namespace hetbook;

namespace {

nlohmann::json ccn_to_json(const CCN& ccn) {
  nlohmann::json j;
  j["cells"] = ccn.cells;
  j["types"] = ccn.types;
  j["inputs"] = ccn.input;
  return j;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

std::string joined(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : (fs::path(dir) / name).string();
}

struct CommonRealizeArgs {
  std::string mode = "book";
  std::string solver = "exact";
  std::string embedding_file;
  std::string out;
  double perturb = 0.0;
  int trials = 0;
  int rays = 72;
  RealizationConfig cfg;
};

void write_realization_outputs(const Realization& R,
                               const RealizationReport& rep,
                               const std::string& out,
                               const VerifyOptions& opt) {
  ensure_dir(out);
  write_file(joined(out, "realization.json"), realization_to_json(R));
  write_file(joined(out, "report.json"),
             report_to_json(rep, R.net).dump(2) + "\n");
  // Per-subspace plots with the verified trajectories overdrawn.
  const double h = opt.step_factor * R.cfg.spacing;
  std::vector<SubspaceId> pages;
  for (const auto& arc : R.arcs)
    if (arc.dim == 2 &&
        std::find(pages.begin(), pages.end(), arc.subspace) == pages.end())
      pages.push_back(arc.subspace);
  for (const auto& sub : pages) {
    std::vector<Trajectory> trajs;
    for (const auto& arc : R.arcs) {
      if (!(arc.subspace == sub) || arc.dim != 2) continue;
      ConnectionTask task = connection_task(R, arc, opt, R.field, nullptr);
      StopPredicate stop = [&](double, std::span<const double> x) {
        return dist2(x, task.target) < opt.arrival_tol;
      };
      trajs.push_back(integrate(R.ccn, R.field, task.start, h, 60.0, stop, 32,
                                1e6));
    }
    write_file(joined(out, "page_" + sub.str() + ".svg"),
               svg_realization_page(R, sub, trajs));
  }
  if (R.mode == RealMode::AlmostComplete) {
    for (int v = 0; v < R.net.num_nodes(); ++v) {
      if (R.assignment[v].kind != SubspaceId::Kind::ThreeD) continue;
      std::vector<Trajectory> trajs;
      for (const auto& arc : R.arcs) {
        if (arc.dim != 3 || arc.source != v) continue;
        ConnectionTask task = connection_task(R, arc, opt, R.field, nullptr);
        StopPredicate stop = [&](double, std::span<const double> x) {
          return dist2(x, task.target) < opt.arrival_tol;
        };
        trajs.push_back(integrate(R.ccn, R.field, task.start, h, 60.0, stop,
                                  32, 1e6));
      }
      write_file(joined(out, "pair_" + R.assignment[v].str() + ".svg"),
                 svg_realization_pair(R, v, trajs));
    }
  }
}

int run(int argc, char** argv) {
  CLI::App app{"heteroclinic network realization toolkit"};
  app.require_subcommand(1);

  // embed ------------------------------------------------------------------
  auto* embed = app.add_subcommand("embed", "compute a book embedding");
  std::string embed_graph, embed_out, embed_solver = "exact", generator;
  int embed_pages_max = 0, gen_n = 6;
  double embed_time_limit = 60.0;
  bool allow_weak = false;
  embed->add_option("graph", embed_graph, "graph JSON file");
  embed->add_option("--solver", embed_solver, "exact | greedy");
  embed->add_option("--pages-max", embed_pages_max, "page cap for the solver");
  embed->add_option("--time-limit", embed_time_limit, "solver seconds");
  embed->add_option("--generator", generator,
                    "dnn-incoming | dnn-outgoing (ignores the graph file)");
  embed->add_option("--n", gen_n, "node count for --generator");
  embed->add_option("--out", embed_out, "output directory");
  embed->add_flag("--allow-weak", allow_weak,
                  "accept graphs that are not strongly connected");

  // network ----------------------------------------------------------------
  auto* network = app.add_subcommand("network", "emit a coupled cell network");
  std::string family;
  std::vector<int> params;
  std::string network_out;
  network->add_option("family", family, "Pn | Q")->required();
  network->add_option("params", params, "n  (Pn)   or   n1 n2  (Q)");
  network->add_option("--out", network_out, "output directory");

  // realize ----------------------------------------------------------------
  auto* realize = app.add_subcommand("realize", "synthesize and verify");
  CommonRealizeArgs ra;
  std::string realize_graph;
  double time_limit = 60.0;
  realize->add_option("graph", realize_graph, "graph JSON file")->required();
  realize->add_option("--mode", ra.mode, "book | almost_complete");
  realize->add_option("--solver", ra.solver, "exact | greedy");
  realize->add_option("--embedding", ra.embedding_file,
                      "use a precomputed embedding JSON");
  realize->add_option("--out", ra.out, "output directory");
  realize->add_option("--seed", ra.cfg.seed, "RNG seed");
  realize->add_option("--perturb", ra.perturb, "perturbation size eta");
  realize->add_option("--trials", ra.trials, "robustness trials");
  realize->add_option("--rays", ra.rays, "basin sampling rays");
  realize->add_option("--spacing", ra.cfg.spacing, "node spacing");
  realize->add_option("--eps", ra.cfg.eps, "local region radius");
  realize->add_option("--kappa", ra.cfg.kappa, "tube clip band");
  realize->add_option("--tube-radius", ra.cfg.tube_radius, "tube radius");
  realize->add_option("--pages-max", embed_pages_max, "page cap");
  realize->add_option("--time-limit", time_limit, "solver seconds");

  // verify -----------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "re-verify a realization dump");
  std::string verify_file, verify_out;
  double verify_perturb = 0.0;
  int verify_trials = 0, verify_rays = 72;
  verify->add_option("realization", verify_file, "realization.json")
      ->required();
  verify->add_option("--out", verify_out, "output directory");
  verify->add_option("--perturb", verify_perturb, "perturbation size eta");
  verify->add_option("--trials", verify_trials, "robustness trials");
  verify->add_option("--rays", verify_rays, "basin sampling rays");

  CLI11_PARSE(app, argc, argv);

  if (embed->parsed()) {
    HetNet net;
    BookEmbedding emb;
    if (!generator.empty()) {
      net = dnn_network(gen_n);
      emb = dnn_embedding(gen_n, generator == "dnn-incoming"
                                     ? DnnMode::IncomingPairs
                                     : DnnMode::OutgoingPairs);
    } else {
      if (embed_graph.empty())
        throw input_error("embed: need a graph file or --generator");
      net = parse_hetnet(read_file(embed_graph), allow_weak);
      if (embed_solver == "greedy") {
        emb = greedy_embed(net, SpineOrder::identity(net.num_nodes()));
      } else {
        ThicknessResult r =
            exact_thickness(net, embed_pages_max, embed_time_limit);
        if (!r.optimal)
          throw solver_limit_error(
              "exact solver timed out; best bound " +
              std::to_string(r.pages) + " pages (non-optimal)");
        emb = r.emb;
      }
    }
    ensure_dir(embed_out);
    write_file(joined(embed_out, "embedding.json"), to_json(emb, net));
    write_file(joined(embed_out, "graph.json"), to_json(net));
    for (int p = 1; p <= emb.pages; ++p)
      write_file(joined(embed_out, "embed_page_" + std::to_string(p) + ".svg"),
                 svg_embedding_page(net, emb, p));
    std::cout << "pages=" << emb.pages << " cells=" << emb.pages + 1 << "\n";
    return 0;
  }

  if (network->parsed()) {
    CCN ccn;
    if (family == "Pn") {
      if (params.size() != 1) throw input_error("network Pn needs one value");
      ccn = build_pn(params[0]);
    } else if (family == "Q") {
      if (params.size() != 2) throw input_error("network Q needs n1 n2");
      ccn = build_q(params[0], params[1]);
    } else {
      throw input_error("unknown family (use Pn or Q)");
    }
    ensure_dir(network_out);
    write_file(joined(network_out, "ccn.json"), ccn_to_json(ccn).dump(2) + "\n");
    write_file(joined(network_out, "ccn.dot"), export_dot(ccn));
    std::cout << "cells=" << ccn.cells << " types=" << ccn.types
              << " minimal_synchrony=";
    bool first = true;
    for (const auto& s : minimal_synchrony(ccn)) {
      std::cout << (first ? "" : ",") << s.str();
      first = false;
    }
    std::cout << "\n";
    return 0;
  }

  if (realize->parsed()) {
    HetNet net = parse_hetnet(read_file(realize_graph));
    ra.cfg.check();
    Realization R;
    if (ra.mode == "book") {
      BookEmbedding emb;
      if (!ra.embedding_file.empty()) {
        emb = parse_embedding(read_file(ra.embedding_file), net);
      } else if (ra.solver == "greedy") {
        emb = greedy_embed(net, SpineOrder::identity(net.num_nodes()));
      } else {
        ThicknessResult r =
            exact_thickness(net, embed_pages_max, time_limit);
        if (!r.optimal)
          throw solver_limit_error("exact solver timed out");
        emb = r.emb;
      }
      R = realize_book(net, emb, ra.cfg);
    } else if (ra.mode == "almost_complete") {
      R = realize_almost_complete(net, ra.cfg);
    } else {
      throw input_error("unknown mode (use book or almost_complete)");
    }
    VerifyOptions opt;
    opt.basin_rays = ra.rays;
    opt.robustness_trials = ra.trials;
    opt.robustness_eta = ra.perturb;
    RealizationReport rep = verify_all(R, opt);
    write_realization_outputs(R, rep, ra.out, opt);
    std::cout << "cells=" << R.ccn.cells << " arcs=" << R.arcs.size()
              << " grade=" << rep.grade << "\n";
    int passed = 0;
    for (const auto& c : rep.connections) passed += c.passed;
    std::cout << "connections " << passed << "/" << rep.connections.size()
              << " passed\n";
    if (!rep.all_connections_passed())
      throw verification_error("some connections failed verification");
    return 0;
  }

  if (verify->parsed()) {
    Realization R = realization_from_json(read_file(verify_file));
    VerifyOptions opt;
    opt.basin_rays = verify_rays;
    opt.robustness_trials = verify_trials;
    opt.robustness_eta = verify_perturb;
    RealizationReport rep = verify_all(R, opt);
    ensure_dir(verify_out);
    write_file(joined(verify_out, "report.json"),
               report_to_json(rep, R.net).dump(2) + "\n");
    std::cout << "grade=" << rep.grade << "\n";
    if (!rep.all_connections_passed())
      throw verification_error("some connections failed verification");
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const solver_limit_error& e) {
    std::cerr << "solver limit: " << e.what() << "\n";
    return 2;
  } catch (const synthesis_error& e) {
    std::cerr << "synthesis failure: " << e.what() << "\n";
    return 3;
  } catch (const verification_error& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
