// Command-line front end: validate, inspect, fold, relax, measure and export.

#include <rigami/rigami.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rigami;

namespace {

struct Options {
  std::string pattern;
  std::string schedule;
  std::string springs;
  std::string settings;
  std::string state;
  std::string out;
  int every = 1;
  bool degrees = false;
  int root_facet = 0;
  double seed_deg = 0.0;
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::domain: return 1;
    case ErrorKind::io: return 2;
    case ErrorKind::solver: return 3;
  }
  return 1;
}

json load_json(const std::string& path) { return detail::parse_json(detail::read_file(path)); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string frame_name(const std::string& prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", k);
  return prefix + buf + ".obj";
}

FoldState load_state(const Options& o, const Mechanism& m) {
  FoldState rho = state_from_json(load_json(o.state), o.degrees);
  m.check_size(rho);
  return rho;
}

bool flat_folded(const FoldState& rho, double tol = 1e-9) {
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    const double a = std::abs(rho[i]);
    if (a > tol && std::abs(a - kPi) > tol) return false;
  }
  return true;
}

json report_json(const ValidationReport& r) {
  json doc;
  doc["ok"] = r.ok();
  doc["violations"] = json::array();
  for (const auto& v : r.violations) {
    doc["violations"].push_back({{"kind", v.kind}, {"location", v.location}, {"value", v.value}});
  }
  return doc;
}

json dims_json(const Dimensions& d) { return {{"L", d.L}, {"W", d.W}, {"H", d.H}}; }

int cmd_validate(const Options& o) {
  const CreasePattern p = load_pattern(o.pattern);
  const ValidationReport r = validate_pattern(p);
  std::cout << report_json(r).dump(1) << "\n";
  return r.ok() ? 0 : 1;
}

int cmd_info(const Options& o) {
  const CreasePattern p = load_pattern(o.pattern);
  const ValidationReport r = validate_pattern(p);
  if (!r.ok()) {
    std::cout << report_json(r).dump(1) << "\n";
    return 1;
  }
  const Mechanism m(p);
  json doc;
  doc["interior_vertices"] = p.interior_vertices().size();
  doc["creases"] = p.num_creases();
  doc["facets"] = p.num_facets();
  doc["vertices"] = p.num_vertices();
  FoldState rho = o.state.empty() ? VecX::Zero(m.num_creases()) : load_state(o, m);
  doc["state"] = o.state.empty() ? "flat" : o.state;
  doc["residual"] = m.residual_measure(rho);
  const auto d = dof(m.assemble(rho));
  doc["dof"] = d;
  if (o.state.empty() && m.num_constraints() > 0) {
    // The flat state is a bifurcation point; compare with a nearby folded one.
    try {
      const FoldState seed = flat_state_seed(m, deg2rad(1.0));
      const auto generic = dof(m.assemble(seed));
      doc["dof_generic"] = generic;
      if (generic != d) {
        std::cerr << "warning: flat state is kinematically degenerate (DOF " << d << " here, " << generic
                  << " at a nearby folded state)\n";
      }
    } catch (const SolverError&) {
      std::cerr << "warning: flat state may be degenerate; no folded seed found\n";
    }
  }
  std::cout << doc.dump(1) << "\n";
  return 0;
}

int cmd_fold(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const CreasePattern p = load_pattern(o.pattern);
  const Mechanism m(p);
  // Without --state the run starts flat, or just off flat with --seed-deg so
  // that the first step does not have to pick a branch at the bifurcation.
  FoldState seed = VecX::Zero(m.num_creases());
  if (!o.state.empty()) seed = load_state(o, m);
  else if (o.seed_deg > 0.0) seed = flat_state_seed(m, deg2rad(o.seed_deg));
  FoldSchedule sched = o.schedule.empty() ? FoldSchedule{} : schedule_from_json(load_json(o.schedule), o.degrees);
  sched = resolve_steps(std::move(sched), seed);
  ensure_dir(o.out);

  const NewtonSettings ns;
  FoldTrajectory tr;
  try {
    tr = run_schedule(m, seed, sched, ns);
  } catch (const Error& e) {
    std::cerr << "fold failed at " << e.what() << "\n";
    return exit_code(e.kind());
  }

  std::string angles = "step,stage";
  for (Eigen::Index i = 0; i < m.num_creases(); ++i) angles += ",rho_" + std::to_string(i);
  angles += "\n";
  std::string residuals = csv_row({"step", "stage", "residual", "iterations", "flat_folded"});
  std::string dims = csv_row({"step", "L", "W", "H", "nu"});
  std::vector<Embedding3D> frames;
  json steps = json::array();
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const FoldState& s = tr.states[k];
    std::vector<std::string> row{std::to_string(k), std::to_string(tr.stage[k])};
    for (Eigen::Index i = 0; i < s.size(); ++i) row.push_back(format_double(s[i]));
    angles += csv_row(row);
    const bool flat = flat_folded(s);
    residuals += csv_row({std::to_string(k), std::to_string(tr.stage[k]), format_double(tr.residuals[k]),
                          std::to_string(tr.iterations[k]), flat ? "1" : "0"});
    frames.push_back(embed(p, s, o.root_facet));
    if (k % static_cast<std::size_t>(o.every) == 0 || k + 1 == tr.states.size()) {
      detail::write_file((fs::path(o.out) / frame_name("frame_", k)).string(), export_obj(p, frames.back()));
    }
    steps.push_back({{"step", k}, {"stage", tr.stage[k]}, {"residual", tr.residuals[k]},
                     {"iterations", tr.iterations[k]}, {"flat_folded", flat}});
  }
  const auto history = sheet_dimension_history(p, frames);
  const auto nu = history.size() > 1 ? poisson_ratio(history) : std::vector<std::optional<double>>{};
  for (std::size_t k = 0; k < history.size(); ++k) {
    // nu of step k uses the change from step k - 1.
    const std::string n = k > 0 && nu[k - 1] ? format_double(*nu[k - 1]) : "";
    dims += csv_row({std::to_string(k), format_double(history[k].L), format_double(history[k].W),
                     format_double(history[k].H), n});
  }
  detail::write_file((fs::path(o.out) / "angles.csv").string(), angles);
  detail::write_file((fs::path(o.out) / "residuals.csv").string(), residuals);
  detail::write_file((fs::path(o.out) / "dimensions.csv").string(), dims);

  json man;
  man["command"] = "fold";
  man["inputs"] = {{"pattern", o.pattern}, {"schedule", o.schedule}, {"state", o.state}};
  man["settings"] = {{"degrees", o.degrees}, {"every", o.every}, {"seed_deg", o.seed_deg}, {"root_facet", o.root_facet},
                     {"tolerance", ns.tolerance}, {"max_iter", ns.max_iter}, {"svd_cutoff", ns.svd.cutoff}};
  man["schedule"] = schedule_to_json(sched);
  man["seed"] = state_to_json(seed)["rho"];
  man["steps"] = std::move(steps);
  man["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::write_file((fs::path(o.out) / "manifest.json").string(), man.dump(1) + "\n");
  std::cout << "fold: " << tr.states.size() << " states written to " << o.out << "\n";
  return 0;
}

int cmd_relax(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const CreasePattern p = load_pattern(o.pattern);
  const Mechanism m(p);
  if (o.springs.empty()) throw DomainError("relax needs --springs");
  const SpringConfig cfg = springs_from_json(load_json(o.springs), p, o.degrees);
  const RelaxSettings st = o.settings.empty() ? RelaxSettings{} : relax_settings_from_json(load_json(o.settings));
  const FoldState start = o.state.empty() ? FoldState(cfg.rest) : load_state(o, m);
  ensure_dir(o.out);

  RelaxResult res;
  try {
    res = relax(m, cfg, st, start);
  } catch (const Error& e) {
    std::cerr << "relax failed: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  std::string energy = csv_row({"step", "energy", "step_factor", "iterations", "residual"});
  std::string charac = csv_row({"step", "crease", "rho"});
  json steps = json::array();
  for (std::size_t k = 0; k < res.states.size(); ++k) {
    const FoldState& s = res.states[k];
    const double r = m.residual_measure(s);
    const std::string c = k > 0 ? format_double(res.step_factors[k - 1]) : "";
    const int it = k > 0 ? res.iterations[k - 1] : 0;
    energy += csv_row({std::to_string(k), format_double(res.energies[k]), c, std::to_string(it), format_double(r)});
    charac += csv_row({std::to_string(k), std::to_string(res.characteristic), format_double(s[res.characteristic])});
    if (k % static_cast<std::size_t>(o.every) == 0 || k + 1 == res.states.size()) {
      detail::write_file((fs::path(o.out) / frame_name("snapshot_", k)).string(),
                         export_obj(p, embed(p, s, o.root_facet)));
    }
    steps.push_back({{"step", k}, {"energy", res.energies[k]}, {"residual", r}, {"iterations", it}});
  }
  detail::write_file((fs::path(o.out) / "energy.csv").string(), energy);
  detail::write_file((fs::path(o.out) / "characteristic.csv").string(), charac);
  json fin = state_to_json(res.final_state);
  fin["energy"] = res.energies.back();
  fin["projected_gradient"] = res.projected_gradient;
  fin["converged"] = res.converged;
  detail::write_file((fs::path(o.out) / "final_state.json").string(), fin.dump(1) + "\n");

  json man;
  man["command"] = "relax";
  man["inputs"] = {{"pattern", o.pattern}, {"springs", o.springs}, {"settings", o.settings}, {"state", o.state}};
  man["settings"] = relax_settings_to_json(st);
  man["settings"]["degrees"] = o.degrees;
  man["settings"]["every"] = o.every;
  man["settings"]["root_facet"] = o.root_facet;
  man["springs"] = springs_to_json(cfg);
  man["start"] = state_to_json(start)["rho"];
  man["characteristic"] = res.characteristic;
  man["halvings"] = res.halvings;
  man["converged"] = res.converged;
  man["steps"] = std::move(steps);
  man["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::write_file((fs::path(o.out) / "manifest.json").string(), man.dump(1) + "\n");
  std::cout << "relax: " << res.states.size() - 1 << " steps, energy " << res.energies.back() << ", "
            << (res.converged ? "converged" : "step budget exhausted") << "\n";
  return res.converged ? 0 : 3;
}

int cmd_measure(const Options& o) {
  const CreasePattern p = load_pattern(o.pattern);
  const Mechanism m(p);
  const FoldState rho = o.state.empty() ? VecX::Zero(m.num_creases()) : load_state(o, m);
  const Embedding3D e = embed(p, rho, o.root_facet);
  json doc;
  doc["root_frame"] = dims_json(measure_dimensions(e));
  doc["sheet_frame"] = dims_json(measure_sheet_dimensions(p, e));
  doc["residual"] = m.residual_measure(rho);
  doc["tear"] = e.tear;
  try {
    doc["waterbomb_theta"] = waterbomb_theta(p, e);
  } catch (const DomainError&) {
  }
  std::cout << doc.dump(1) << "\n";
  return 0;
}

int cmd_export_obj(const Options& o) {
  const CreasePattern p = load_pattern(o.pattern);
  const Mechanism m(p);
  const FoldState rho = o.state.empty() ? VecX::Zero(m.num_creases()) : load_state(o, m);
  const std::string obj = export_obj(p, embed(p, rho, o.root_facet));
  if (o.out.empty()) std::cout << obj;
  else detail::write_file(o.out, obj);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid origami folding engine"};
  app.require_subcommand(1);
  Options o;

  auto pattern = [&](CLI::App* c) { c->add_option("--pattern", o.pattern, "Crease pattern JSON")->required(); };
  auto state = [&](CLI::App* c) { c->add_option("--state", o.state, "Fold state JSON {\"rho\": [...]}"); };
  auto degrees = [&](CLI::App* c) { c->add_flag("--degrees", o.degrees, "Angles in input files are degrees"); };
  auto root = [&](CLI::App* c) {
    c->add_option("--root-facet", o.root_facet, "Facet held fixed in the embedding")->check(CLI::NonNegativeNumber);
  };
  auto every = [&](CLI::App* c) {
    c->add_option("--every", o.every, "Write every k-th mesh")->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "Check a crease pattern");
  pattern(validate);

  auto* info = app.add_subcommand("info", "Counts and degrees of freedom");
  pattern(info);
  state(info);
  degrees(info);

  auto* fold = app.add_subcommand("fold", "Sequential folding along a schedule");
  pattern(fold);
  fold->add_option("--schedule", o.schedule, "Schedule JSON");
  fold->add_option("--seed-deg", o.seed_deg, "Start from the flat state folded by this many degrees")
      ->check(CLI::Range(0.0, 90.0));
  fold->add_option("--out", o.out, "Output directory")->required();
  state(fold);
  degrees(fold);
  every(fold);
  root(fold);

  auto* relax_cmd = app.add_subcommand("relax", "Elastic relaxation onto a folded form");
  pattern(relax_cmd);
  relax_cmd->add_option("--springs", o.springs, "Spring JSON")->required();
  relax_cmd->add_option("--settings", o.settings, "Relaxation settings JSON");
  relax_cmd->add_option("--out", o.out, "Output directory")->required();
  state(relax_cmd);
  degrees(relax_cmd);
  every(relax_cmd);
  root(relax_cmd);

  auto* measure = app.add_subcommand("measure", "Folded dimensions of a state");
  pattern(measure);
  state(measure);
  degrees(measure);
  root(measure);

  auto* export_cmd = app.add_subcommand("export-obj", "Write a state as a Wavefront OBJ mesh");
  pattern(export_cmd);
  state(export_cmd);
  degrees(export_cmd);
  root(export_cmd);
  export_cmd->add_option("--out", o.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*info) return cmd_info(o);
    if (*fold) return cmd_fold(o);
    if (*relax_cmd) return cmd_relax(o);
    if (*measure) return cmd_measure(o);
    if (*export_cmd) return cmd_export_obj(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
