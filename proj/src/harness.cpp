#include "thm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace thm {

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::convergence_h: return "convergence-h";
    case ExperimentKind::convergence_p: return "convergence-p";
    case ExperimentKind::robustness_theta: return "robustness-theta";
    case ExperimentKind::robustness_kappa: return "robustness-kappa";
    case ExperimentKind::robustness_thetakappa: return "robustness-thetakappa";
    case ExperimentKind::superconvergence_h: return "superconvergence";
    case ExperimentKind::superconvergence_nu: return "superconvergence-nu";
  }
  return "?";
}

ExperimentKind kind_from_name(const std::string& name) {
  for (ExperimentKind k :
       {ExperimentKind::convergence_h, ExperimentKind::convergence_p,
        ExperimentKind::robustness_theta, ExperimentKind::robustness_kappa,
        ExperimentKind::robustness_thetakappa,
        ExperimentKind::superconvergence_h,
        ExperimentKind::superconvergence_nu})
    if (kind_name(k) == name) return k;
  throw std::invalid_argument("unknown experiment kind: " + name);
}

ElementParams default_params() {
  ElementParams p;
  p.a0 = 0.02;
  p.b0 = 0.01;
  p.c0 = 0.03;
  p.alpha = 1.0;
  p.beta = 0.8;
  p.c_f = 1.0;
  p.mu = 1.0;
  p.lambda = 5.0;
  p.K = Sym2::identity(0.2);
  p.Theta = Sym2::identity(0.05);
  return p;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split_list(s)) out.push_back(std::stoi(item));
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(std::stod(item));
  return out;
}

std::vector<TransportVariant> parse_variants(const std::string& s) {
  std::vector<TransportVariant> out;
  for (const auto& item : split_list(s)) out.push_back(variant_from_name(item));
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("invalid boolean: " + s);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "kind") cfg.kind = kind_from_name(val);
    else if (key == "cells") cfg.cells = parse_ints(val);
    else if (key == "degrees") cfg.degrees = parse_ints(val);
    else if (key == "variants") cfg.variants = parse_variants(val);
    else if (key == "theta_values") cfg.theta_values = parse_doubles(val);
    else if (key == "nu_values") cfg.nu_values = parse_doubles(val);
    else if (key == "theta") cfg.theta = std::stod(val);
    else if (key == "kappa") cfg.kappa = std::stod(val);
    else if (key == "a0b0c0") cfg.a0b0c0 = std::stod(val);
    else if (key == "cf") cfg.cf = std::stod(val);
    else if (key == "nu_u") cfg.nu_u = std::stod(val);
    else if (key == "nu_p") cfg.nu_p = std::stod(val);
    else if (key == "nu_T") cfg.nu_T = std::stod(val);
    else if (key == "mirrored") cfg.mirrored = parse_bool(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "lloyd") cfg.lloyd = std::stoi(val);
    else if (key == "tolerance") cfg.tolerance = std::stod(val);
    else if (key == "max_iterations") cfg.max_iterations = std::stoi(val);
    else if (key == "penalty") cfg.penalty = std::stod(val);
    else if (key == "upwind_all_faces") cfg.upwind_all_faces = parse_bool(val);
    else if (key == "heavy_cells") cfg.heavy_cells = parse_ints(val);
    else if (key == "heavy_degrees") cfg.heavy_degrees = parse_ints(val);
    else if (key == "allow_max_iter") cfg.allow_max_iter = parse_variants(val);
    else if (key == "out") cfg.out = val;
    else
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return parse_config(in);
}

namespace {

struct SweepPoint {
  int N = 0;
  int ell = 0;
  TransportVariant variant = TransportVariant::vol;
  std::optional<double> theta;  // per-point Theta multiplier
  std::optional<double> nu;     // per-point nu_p = nu_T
  bool heavy = false;
};

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string point_kind(const ExperimentConfig& cfg, const SweepPoint& pt) {
  std::string k = kind_name(cfg.kind);
  if (pt.theta && cfg.kind == ExperimentKind::robustness_theta)
    k += "@" + format_g(*pt.theta);
  if (pt.nu) k += "@" + format_g(*pt.nu);
  return k;
}

bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

bool contains(const std::vector<TransportVariant>& v, TransportVariant x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

std::string rows_to_csv(const std::vector<RunRow>& rows) {
  std::string csv =
      "kind,variant,ell,N,h,status,iters,err_u_L2,err_u_dG,err_p_L2,"
      "err_p_dG,err_T_L2,err_T_dG,err_phi_L2\n";
  char buf[512];
  for (const RunRow& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%s,%s,%d,%d,%.12g,%s,%d,%.12g,%.12g,%.12g,%.12g,%.12g,"
                  "%.12g,%.12g\n",
                  r.kind.c_str(), variant_name(r.variant).c_str(), r.ell, r.N,
                  r.h, r.status.c_str(), r.iters, r.err.u_L2, r.err.u_dG,
                  r.err.p_L2, r.err.p_dG, r.err.T_L2, r.err.T_dG,
                  r.err.phi_L2);
    csv += buf;
  }
  return csv;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                bool include_heavy) {
  std::vector<SweepPoint> points;
  auto base_points = [&](auto&& emit) {
    for (int ell : cfg.degrees)
      for (int N : cfg.cells)
        for (TransportVariant v : cfg.variants) emit(N, ell, v);
  };
  switch (cfg.kind) {
    case ExperimentKind::robustness_theta:
      if (cfg.theta_values.empty())
        throw std::invalid_argument("robustness-theta needs theta_values");
      base_points([&](int N, int ell, TransportVariant v) {
        for (double th : cfg.theta_values) {
          SweepPoint pt{N, ell, v};
          pt.theta = th;
          points.push_back(pt);
        }
      });
      break;
    case ExperimentKind::superconvergence_nu:
      if (cfg.nu_values.empty())
        throw std::invalid_argument("superconvergence-nu needs nu_values");
      base_points([&](int N, int ell, TransportVariant v) {
        for (double nu : cfg.nu_values) {
          SweepPoint pt{N, ell, v};
          pt.nu = nu;
          points.push_back(pt);
        }
      });
      break;
    default:
      base_points([&](int N, int ell, TransportVariant v) {
        points.push_back({N, ell, v});
      });
      break;
  }
  for (SweepPoint& pt : points)
    pt.heavy = contains(cfg.heavy_cells, pt.N) ||
               contains(cfg.heavy_degrees, pt.ell);

  std::stable_sort(points.begin(), points.end(),
                   [](const SweepPoint& a, const SweepPoint& b) {
                     if (a.ell != b.ell) return a.ell < b.ell;
                     if (a.N != b.N) return a.N < b.N;
                     return static_cast<int>(a.variant) <
                            static_cast<int>(b.variant);
                   });

  std::map<int, std::shared_ptr<PolyMesh>> meshes;
  auto mesh_for = [&](int N) {
    auto it = meshes.find(N);
    if (it != meshes.end()) return it->second;
    auto mesh = std::make_shared<PolyMesh>(
        generate_voronoi(N, Rect{}, cfg.seed, cfg.lloyd));
    meshes.emplace(N, mesh);
    return mesh;
  };

  // Spaces and tableaus depend only on (mesh, degree); parameters and face
  // coefficients are refreshed per sweep point.
  struct CtxKey {
    int N, ell;
    bool operator==(const CtxKey&) const = default;
  };
  std::optional<CtxKey> ctx_key;
  std::shared_ptr<AssemblyContext> ctx;

  ExperimentResult result;
  for (const SweepPoint& pt : points) {
    if (pt.heavy && !include_heavy) continue;

    ElementParams ep = default_params();
    if (cfg.a0b0c0) ep.a0 = ep.b0 = ep.c0 = *cfg.a0b0c0;
    if (cfg.cf) ep.c_f = *cfg.cf;
    if (cfg.kappa) ep.K = Sym2::identity(*cfg.kappa);
    const double theta_mult =
        pt.theta ? *pt.theta : (cfg.theta ? *cfg.theta : -1.0);
    if (theta_mult >= 0.0) ep.Theta = Sym2::identity(theta_mult);

    ManufacturedCase mcase;
    mcase.kind = cfg.mirrored ? CaseKind::trig_mirrored : CaseKind::trig;
    mcase.nu_u = cfg.nu_u;
    mcase.nu_p = pt.nu ? *pt.nu : cfg.nu_p;
    mcase.nu_T = pt.nu ? *pt.nu : cfg.nu_T;

    auto mesh = mesh_for(pt.N);
    PenaltyParams pen;
    pen.alpha1 = pen.alpha2 = pen.alpha3 = pen.alpha4 = cfg.penalty;
    pen.upwind_all_faces = cfg.upwind_all_faces;
    const CtxKey key{pt.N, pt.ell};
    if (!ctx_key || !(key == *ctx_key)) {
      ctx = std::make_shared<AssemblyContext>(AssemblyContext::create(
          *mesh, pt.ell, pt.ell, ModelParams::uniform(ep, mesh->n_cells()),
          pen));
      ctx_key = key;
    } else {
      ctx->params = ModelParams::uniform(ep, mesh->n_cells());
      ctx->penalties = pen;
      for (int fidx = 0; fidx < mesh->n_faces(); ++fidx)
        ctx->fc[fidx] = face_coefficients(*mesh, fidx, ctx->params, pen,
                                          pt.ell, pt.ell);
    }

    CoupledProblem problem;
    problem.ctx = ctx.get();
    problem.dirichlet = dirichlet_from(mcase);
    problem.sources = sources_from(mcase, ep);

    PicardOptions popts;
    popts.tolerance = cfg.tolerance;
    popts.max_iterations = cfg.max_iterations;
    popts.variant = pt.variant;

    RunRow row;
    row.kind = point_kind(cfg, pt);
    row.variant = pt.variant;
    row.ell = pt.ell;
    row.N = pt.N;
    row.h = mesh->max_h();
    row.heavy = pt.heavy;
    try {
      auto [x, st] = fixed_point_solve(problem, popts);
      row.status = status_name(st.status);
      row.iters = st.iterations;
      row.err = error_norms(x, mcase, *ctx);
      row.err.h = row.h;
      row.err.iterations = st.iterations;
      const bool ok = st.status == PicardStatus::converged ||
                      contains(cfg.allow_max_iter, pt.variant);
      if (!ok) result.all_ok = false;
    } catch (const SolverError&) {
      row.status = "solver_error";
      row.iters = 0;
      if (!contains(cfg.allow_max_iter, pt.variant)) result.all_ok = false;
    }
    result.rows.push_back(row);
  }

  result.csv = rows_to_csv(result.rows);

  // Observed orders over the mesh sweep, appended as comment lines.
  if (cfg.kind == ExperimentKind::convergence_h ||
      cfg.kind == ExperimentKind::superconvergence_h ||
      cfg.kind == ExperimentKind::robustness_kappa ||
      cfg.kind == ExperimentKind::robustness_thetakappa) {
    for (int ell : cfg.degrees) {
      for (TransportVariant v : cfg.variants) {
        std::vector<const RunRow*> seq;
        for (const RunRow& r : result.rows)
          if (r.ell == ell && r.variant == v && r.status == "converged")
            seq.push_back(&r);
        if (seq.size() < 2) continue;
        std::sort(seq.begin(), seq.end(),
                  [](const RunRow* a, const RunRow* b) { return a->h > b->h; });
        std::vector<double> hs;
        for (auto* r : seq) hs.push_back(r->h);
        auto append_order = [&](const char* name, auto select) {
          std::vector<double> errs;
          for (auto* r : seq) errs.push_back(select(r->err));
          double slope;
          try {
            slope = observed_order(errs, hs);
          } catch (const std::exception&) {
            return;
          }
          char buf[160];
          std::snprintf(buf, sizeof(buf), "# order,%s,%d,%s,%.6g\n",
                        variant_name(v).c_str(), ell, name, slope);
          result.csv += buf;
        };
        append_order("u_L2", [](const ErrorReport& e) { return e.u_L2; });
        append_order("u_dG", [](const ErrorReport& e) { return e.u_dG; });
        append_order("p_L2", [](const ErrorReport& e) { return e.p_L2; });
        append_order("p_dG", [](const ErrorReport& e) { return e.p_dG; });
        append_order("T_L2", [](const ErrorReport& e) { return e.T_L2; });
        append_order("T_dG", [](const ErrorReport& e) { return e.T_dG; });
        append_order("phi_L2", [](const ErrorReport& e) { return e.phi_L2; });
      }
    }
  }
  return result;
}

}  // namespace thm
