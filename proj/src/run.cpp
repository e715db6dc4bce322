#include "qgdirac/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qgdirac/io.hpp"
#include "qgdirac/verification.hpp"

namespace qgdirac {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string join_path(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : dir + "/" + name;
}

void finish_manifest(const RunConfig& rc, const std::string& sub, const std::string& out_dir,
                     double wall_seconds) {
  auto entries = rc.materialized;
  entries["wall_seconds"] = std::to_string(wall_seconds);
  write_manifest(join_path(out_dir, "manifest.json"), sub, entries);
}

int cmd_spectrum(const RunConfig& rc, const std::string& out_dir) {
  const auto t0 = Clock::now();
  MetricGraph graph = MetricGraph::build(rc.graph);
  DiscreteOperator op = assemble(graph, rc.params);
  SpectralSplit split = spectral_split(op, rc.params);

  CsvWriter csv({"index", "lambda"});
  for (int k = 0; k < split.dim(); ++k)
    csv.add_row({std::to_string(k), CsvWriter::format_number(split.lambda[k])});
  csv.write(join_path(out_dir, "spectrum.csv"));

  if (rc.emit_svg) {
    SvgSeries s;
    s.label = "lambda";
    for (int k = 0; k < split.dim(); ++k) {
      s.x.push_back(k);
      s.y.push_back(split.lambda[k]);
    }
    write_svg_plot(join_path(out_dir, "spectrum.svg"), "eigenvalues (" + rc.graph_preset + ")",
                   {s});
  }
  std::cout << "spectrum: " << split.dim() << " eigenvalues, gap edge "
            << std::min(std::abs(split.lambda[split.first_nonneg]),
                        std::abs(split.lambda[split.first_nonneg - 1]))
            << "\n";
  finish_manifest(rc, "spectrum", out_dir, seconds_since(t0));
  return 0;
}

int cmd_validate(const RunConfig& rc, const std::string& out_dir) {
  const auto t0 = Clock::now();
  MetricGraph graph = MetricGraph::build(rc.graph);

  std::ostringstream report;
  const ValidationReport fr = validate_f(rc.nl, rc.validate_t_max, 20000);
  report << "nonlinearity " << rc.nl.describe() << "\n" << fr.format();
  bool ok = fr.pass();

  if (rc.potential) {
    const PotentialReport vr = validate_V(*rc.potential, graph, rc.params, rc.params.h_target);
    report << "\npotential: min " << vr.v_min << ", max " << vr.v_max << ", minima found "
           << vr.minima.size() << "\n"
           << vr.report.format();
    for (const auto& z : vr.minima)
      report << "  minimum near edge " << z.edge << " s " << z.s << "\n";
    ok = ok && vr.report.pass();
  } else {
    report << "\nno potential configured (autonomous problem)\n";
  }

  std::cout << report.str();
  std::ofstream out(join_path(out_dir, "validate.txt"), std::ios::binary);
  out << report.str();
  finish_manifest(rc, "validate", out_dir, seconds_since(t0));
  return ok ? 0 : 1;
}

void write_profile_csv(const Workspace& ws, const Spinor& u, const std::string& path) {
  const auto& grid = ws.op->grid;
  CsvWriter csv({"edge", "s", "abs_u1", "abs_u2"});
  for (const auto& eg : grid.edges) {
    for (int j = 0; j <= eg.n; ++j) {
      const int slot = grid.comp1_slot_of_node(eg, j);
      const double a1 = (slot >= 0) ? std::abs(u[slot]) : 0.0;
      double a2 = 0.0;
      if (j == 0)
        a2 = std::abs(u[eg.first_mid]);
      else if (j == eg.n)
        a2 = std::abs(u[eg.first_mid + eg.n - 1]);
      else
        a2 = 0.5 * (std::abs(u[eg.first_mid + j - 1]) + std::abs(u[eg.first_mid + j]));
      csv.add_row({std::to_string(eg.edge), CsvWriter::format_number(j * eg.h),
                   CsvWriter::format_number(a1), CsvWriter::format_number(a2)});
    }
  }
  csv.write(path);
}

int cmd_ground(const RunConfig& rc, const std::string& out_dir) {
  const auto t0 = Clock::now();
  Workspace ws = Workspace::make(rc.graph, rc.params, rc.nl, rc.potential);

  MultistartResult mr =
      rc.potential
          ? c_eps(*ws.ctx, rc.eps_list.front(), rc.multistarts, rc.seed, rc.opts)
          : ground_level_d(*ws.ctx, rc.lambda_single, rc.multistarts, rc.seed, rc.opts);

  const GroundState& gs = mr.best;
  std::cout << "level " << gs.level << "  spread " << mr.spread << "  residuals: self "
            << gs.point.residual_self << ", neg " << gs.point.residual_neg << ", tangent "
            << gs.tangent_residual << ", dual " << gs.gradient_dual_norm << "\n";

  write_profile_csv(ws, gs.point.u, join_path(out_dir, "profile.csv"));
  CsvWriter info({"level", "spread", "residual_self", "residual_neg", "tangent", "dual_norm",
                  "iterations"});
  info.add_row_numbers({gs.level, mr.spread, gs.point.residual_self, gs.point.residual_neg,
                        gs.tangent_residual, gs.gradient_dual_norm,
                        static_cast<double>(gs.iterations)});
  info.write(join_path(out_dir, "ground.csv"));
  finish_manifest(rc, "ground", out_dir, seconds_since(t0));
  return gs.converged ? 0 : 2;
}

int cmd_dcurve(const RunConfig& rc, const std::string& out_dir) {
  const auto t0 = Clock::now();
  Workspace ws = Workspace::make(rc.graph, rc.params, rc.nl, std::nullopt);
  CsvWriter csv({"lambda", "d", "spread", "converged_starts"});
  for (double lam : rc.lambda_grid) {
    const MultistartResult mr = ground_level_d(*ws.ctx, lam, rc.multistarts, rc.seed, rc.opts);
    csv.add_row_numbers({lam, mr.best.level, mr.spread, static_cast<double>(mr.n_converged)});
    std::cout << "lambda " << lam << "  d " << mr.best.level << "  spread " << mr.spread << "\n";
  }
  csv.write(join_path(out_dir, "dcurve.csv"));
  finish_manifest(rc, "dcurve", out_dir, seconds_since(t0));
  return 0;
}

int cmd_ceps(const RunConfig& rc, const std::string& out_dir) {
  const auto t0 = Clock::now();
  if (!rc.potential) throw ConfigError("ceps requires a [potential] section");
  Workspace ws = Workspace::make(rc.graph, rc.params, rc.nl, rc.potential);
  CsvWriter csv({"eps", "c", "spread", "converged_starts"});
  for (double eps : rc.eps_list) {
    const MultistartResult mr = c_eps(*ws.ctx, eps, rc.multistarts, rc.seed, rc.opts);
    csv.add_row_numbers({eps, mr.best.level, mr.spread, static_cast<double>(mr.n_converged)});
    std::cout << "eps " << eps << "  c " << mr.best.level << "  spread " << mr.spread << "\n";
  }
  csv.write(join_path(out_dir, "ceps.csv"));
  finish_manifest(rc, "ceps", out_dir, seconds_since(t0));
  return 0;
}

int cmd_concentrate(const RunConfig& rc, const std::string& out_dir) {
  const auto t0 = Clock::now();
  if (!rc.potential) throw ConfigError("concentrate requires a [potential] section");
  Workspace ws = Workspace::make(rc.graph, rc.params, rc.nl, rc.potential);
  const BarycenterConfig bary = make_barycenter_config(rc, *ws.graph);

  const auto records = multiplicity_experiment(*ws.ctx, rc.eps_list, bary, rc.seed, rc.opts);

  CsvWriter csv({"eps", "i", "level", "Qx", "Qy", "dist", "residual", "accepted"});
  CsvWriter pair({"eps", "i", "j", "rel_l2"});
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      csv.add_row({CsvWriter::format_number(rec.eps), std::to_string(row.well),
                   CsvWriter::format_number(row.level), CsvWriter::format_number(row.Q.x),
                   CsvWriter::format_number(row.Q.y), CsvWriter::format_number(row.dist),
                   CsvWriter::format_number(row.residual), row.accepted ? "1" : "0"});
      if (!row.accepted)
        std::cout << "eps " << rec.eps << " well " << row.well << " rejected: " << row.reason
                  << "\n";
    }
    for (std::size_t i = 0; i < rec.rows.size(); ++i)
      for (std::size_t j = i + 1; j < rec.rows.size(); ++j)
        pair.add_row({CsvWriter::format_number(rec.eps), std::to_string(i), std::to_string(j),
                      CsvWriter::format_number(rec.pairwise_rel_l2[i][j])});
  }
  csv.write(join_path(out_dir, "records.csv"));
  pair.write(join_path(out_dir, "pairwise.csv"));

  // |u| overlay along each edge for the smallest eps
  if (!records.empty()) {
    const auto& rec = records.back();
    std::vector<SvgSeries> series;
    const auto& grid = ws.op->grid;
    for (const auto& row : rec.rows) {
      const Eigen::VectorXd rho2 = collocated_sq_modulus(*ws.op, row.u);
      for (const auto& eg : grid.edges) {
        SvgSeries s;
        s.label = "well " + std::to_string(row.well) + " edge " + std::to_string(eg.edge);
        for (int j = 1; j < eg.n; ++j) {
          const int slot = eg.first_interior + j - 1;
          s.x.push_back(j * eg.h);
          s.y.push_back(std::sqrt(rho2[slot]));
        }
        series.push_back(std::move(s));
      }
    }
    write_svg_plot(join_path(out_dir, "profiles.svg"),
                   "|u| along edges at eps = " + CsvWriter::format_number(rec.eps), series);
  }

  bool all_ok = true;
  for (const auto& rec : records)
    for (const auto& row : rec.rows) all_ok = all_ok && row.accepted;
  finish_manifest(rc, "concentrate", out_dir, seconds_since(t0));
  return all_ok ? 0 : 2;
}

int cmd_verify(const RunConfig& rc, const std::string& out_dir) {
  const auto t0 = Clock::now();
  std::ostringstream report;
  bool ok = true;
  auto note = [&](const OracleReport& r) {
    report << r.format() << "\n";
    ok = ok && r.pass;
  };

  for (double p : {3.0, 4.0, 6.0})
    note(lemma32_scan(Nonlinearity::pure_power(p), 100000, rc.seed + std::lround(p)));

  {
    // dispersion check on the interval
    SolverParams params = rc.params;
    params.h_target = M_PI / 200.0;
    MetricGraph graph = MetricGraph::build(preset_interval(M_PI));
    DiscreteOperator op = assemble(graph, params);
    SpectralSplit split = spectral_split(op, params);
    const auto oracle = dispersion_interval(M_PI, params.m, params.c, 10);
    std::vector<std::pair<double, double>> by_abs;  // |lambda|, lambda
    for (int k = 0; k < split.dim(); ++k)
      by_abs.push_back({std::abs(split.lambda[k]), split.lambda[k]});
    std::sort(by_abs.begin(), by_abs.end());
    std::vector<double> oracle_abs;
    for (double v : oracle) oracle_abs.push_back(std::abs(v));
    std::sort(oracle_abs.begin(), oracle_abs.end());
    double worst = 0.0;
    for (int i = 0; i < 20; ++i)
      worst = std::max(worst, std::abs(by_abs[i].first - oracle_abs[i]) / oracle_abs[i]);
    OracleReport r;
    r.name = "interval dispersion, 20 smallest |lambda|";
    r.samples = 20;
    r.worst_margin = worst;
    r.pass = worst < 1e-3;
    note(r);
  }

  {
    SolverParams params = rc.params;
    params.h_target = 0.1;
    struct Preset {
      const char* name;
      GraphSpec spec;
    };
    const std::vector<Preset> presets = {{"interval", preset_interval(M_PI)},
                                         {"star3", preset_star(3, 8.0)},
                                         {"tadpole", preset_tadpole(2.0, 8.0)}};
    for (const auto& pr : presets) {
      Workspace ws = Workspace::make(pr.spec, params, rc.nl, std::nullopt);
      OracleReport r = lemma21_scan(*ws.ctx, 1000, rc.seed + 11);
      r.name += std::string(" [") + pr.name + "]";
      note(r);
    }
  }

  {
    SolverParams params = rc.params;
    params.h_target = 0.1;
    Workspace ws = Workspace::make(preset_star(3, 8.0), params, rc.nl, std::nullopt);
    const FieldTerm field = ws.ctx->constant_field(0.2);
    note(gradient_check_energy(*ws.ctx, field, 10, {1e-3, 1e-4}, rc.seed + 21).report);
    note(gradient_check_reduced(*ws.ctx, field, 5, {1e-3, 1e-4}, rc.seed + 22, rc.opts).report);
  }

  std::cout << report.str();
  std::ofstream out(join_path(out_dir, "verify.txt"), std::ios::binary);
  out << report.str();
  finish_manifest(rc, "verify", out_dir, seconds_since(t0));
  return ok ? 0 : 1;
}

}  // namespace

BarycenterConfig make_barycenter_config(const RunConfig& rc, const MetricGraph& g) {
  if (!rc.potential) throw ConfigError("barycenter configuration requires wells");
  std::vector<Vec2> minima;
  std::vector<GraphPoint> minima_gp;
  for (const auto& w : rc.potential->wells()) {
    minima.push_back(g.embed(w.center));
    minima_gp.push_back(w.center);
  }
  BarycenterConfig bc = BarycenterConfig::from_minima(std::move(minima), std::move(minima_gp));
  if (rc.bary) {
    if (rc.bary->r0 > 0.0) bc.r0 = rc.bary->r0;
    if (rc.bary->rho0 > 0.0) bc.rho0 = rc.bary->rho0;
    bc.check();
  }
  return bc;
}

int run_subcommand_on(const std::string& name, const ConfigFile& file,
                      const std::string& out_dir_override) {
  RunConfig rc;
  try {
    rc = load_run_config(file);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  const std::string out_dir = out_dir_override.empty() ? rc.out_dir : out_dir_override;
  try {
    ensure_directory(out_dir);
    if (name == "spectrum") return cmd_spectrum(rc, out_dir);
    if (name == "validate") return cmd_validate(rc, out_dir);
    if (name == "ground") return cmd_ground(rc, out_dir);
    if (name == "dcurve") return cmd_dcurve(rc, out_dir);
    if (name == "ceps") return cmd_ceps(rc, out_dir);
    if (name == "concentrate") return cmd_concentrate(rc, out_dir);
    if (name == "verify") return cmd_verify(rc, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "unknown subcommand: " << name << "\n";
  return 1;
}

int run_subcommand(const std::string& name, const std::string& config_path) {
  ConfigFile file;
  try {
    file = ConfigFile::parse_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  return run_subcommand_on(name, file);
}

}  // namespace qgdirac
