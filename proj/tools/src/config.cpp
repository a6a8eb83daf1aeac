#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "qdb/errors.hpp"
#include "qdb_tools/scenario.hpp"

namespace qdb::tools {

namespace {

struct Context {
  std::vector<std::string> errors;
  std::vector<std::string> unknown;

  void error(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }
};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}
std::string index(const std::string& path, std::size_t i) { return fmt::format("{}[{}]", path, i); }

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed,
                Context& ctx) {
  if (!node.IsMap()) return;
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (ok.count(key) == 0) ctx.unknown.push_back(join(path, key) + ": unknown key");
  }
}

std::optional<double> as_real(const YAML::Node& n, const std::string& path, Context& ctx) {
  if (!n.IsScalar()) {
    ctx.error(path, "expected a number");
    return std::nullopt;
  }
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    ctx.error(path, fmt::format("'{}' is not a number", n.Scalar()));
    return std::nullopt;
  }
}

std::optional<Complex> as_complex(const YAML::Node& n, const std::string& path, Context& ctx) {
  if (n.IsScalar()) {
    const auto re = as_real(n, path, ctx);
    if (!re) return std::nullopt;
    return Complex(*re, 0.0);
  }
  if (n.IsSequence() && n.size() == 2) {
    const auto re = as_real(n[0], index(path, 0), ctx);
    const auto im = as_real(n[1], index(path, 1), ctx);
    if (!re || !im) return std::nullopt;
    return Complex(*re, *im);
  }
  ctx.error(path, "expected a number or an [re, im] pair");
  return std::nullopt;
}

template <class T>
std::optional<T> required(const YAML::Node& parent, const std::string& parent_path, const char* key,
                          Context& ctx,
                          std::optional<T> (*parse)(const YAML::Node&, const std::string&, Context&)) {
  const YAML::Node n = parent[key];
  if (!n) {
    ctx.error(join(parent_path, key), "missing required key");
    return std::nullopt;
  }
  return parse(n, join(parent_path, key), ctx);
}

std::optional<RVector> as_real_vector(const YAML::Node& n, const std::string& path, Context& ctx) {
  if (!n.IsSequence()) {
    ctx.error(path, "expected a list of numbers");
    return std::nullopt;
  }
  RVector v(static_cast<Index>(n.size()));
  bool ok = true;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto x = as_real(n[i], index(path, i), ctx);
    if (x) {
      v(static_cast<Index>(i)) = *x;
    } else {
      ok = false;
    }
  }
  return ok ? std::optional<RVector>(v) : std::nullopt;
}

std::optional<CVector> as_complex_vector(const YAML::Node& n, const std::string& path, Context& ctx) {
  if (!n.IsSequence()) {
    ctx.error(path, "expected a list of numbers or [re, im] pairs");
    return std::nullopt;
  }
  CVector v(static_cast<Index>(n.size()));
  bool ok = true;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto x = as_complex(n[i], index(path, i), ctx);
    if (x) {
      v(static_cast<Index>(i)) = *x;
    } else {
      ok = false;
    }
  }
  return ok ? std::optional<CVector>(v) : std::nullopt;
}

// Row-major nested lists; every row must have the length of the first.
template <class Matrix, class Entry>
std::optional<Matrix> as_matrix(const YAML::Node& n, const std::string& path, Context& ctx,
                                std::optional<Entry> (*entry)(const YAML::Node&, const std::string&, Context&)) {
  if (!n.IsSequence() || n.size() == 0) {
    ctx.error(path, "expected a non-empty list of rows");
    return std::nullopt;
  }
  const std::size_t rows = n.size();
  std::size_t cols = 0;
  bool ok = true;
  Matrix m;
  for (std::size_t i = 0; i < rows; ++i) {
    const YAML::Node row = n[i];
    if (!row.IsSequence()) {
      ctx.error(index(path, i), "expected a list (matrix row)");
      return std::nullopt;
    }
    if (i == 0) {
      cols = row.size();
      m.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    } else if (row.size() != cols) {
      ctx.error(index(path, i), fmt::format("row has {} entries, expected {}", row.size(), cols));
      return std::nullopt;
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const auto x = entry(row[j], fmt::format("{}[{}][{}]", path, i, j), ctx);
      if (x) {
        m(static_cast<Index>(i), static_cast<Index>(j)) = *x;
      } else {
        ok = false;
      }
    }
  }
  return ok ? std::optional<Matrix>(m) : std::nullopt;
}

std::optional<RMatrix> as_real_matrix(const YAML::Node& n, const std::string& path, Context& ctx) {
  return as_matrix<RMatrix, double>(n, path, ctx, as_real);
}
std::optional<CMatrix> as_complex_matrix(const YAML::Node& n, const std::string& path, Context& ctx) {
  return as_matrix<CMatrix, Complex>(n, path, ctx, as_complex);
}

void expect_shape(const std::string& path, Index rows, Index cols, Index want_rows, Index want_cols, Context& ctx) {
  if (rows != want_rows || cols != want_cols) {
    ctx.error(path, fmt::format("expected {}x{}, got {}x{}", want_rows, want_cols, rows, cols));
  }
}

std::optional<ScenarioKind> parse_kind(const YAML::Node& n, const std::string& path, Context& ctx) {
  const std::string s = n.IsScalar() ? n.Scalar() : "";
  if (s == "gds") return ScenarioKind::Gds;
  if (s == "finite_lindblad") return ScenarioKind::FiniteLindblad;
  if (s == "classical_ou") return ScenarioKind::ClassicalOu;
  if (s == "cross_validate") return ScenarioKind::CrossValidate;
  ctx.error(path, fmt::format("unknown kind '{}' (expected gds, finite_lindblad, classical_ou, cross_validate)", s));
  return std::nullopt;
}

bool as_bool(const YAML::Node& n, const std::string& path, Context& ctx) {
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    ctx.error(path, "expected true or false");
    return false;
  }
}

std::optional<long long> as_integer(const YAML::Node& n, const std::string& path, Context& ctx) {
  try {
    return n.as<long long>();
  } catch (const YAML::Exception&) {
    ctx.error(path, "expected an integer");
    return std::nullopt;
  }
}

void parse_time_grid(const YAML::Node& n, ScenarioConfig& cfg, Context& ctx) {
  const std::string path = "time_grid";
  if (!n) {
    ctx.error(path, "missing required key");
    return;
  }
  check_keys(n, path, {"t_start", "t_end", "n_points"}, ctx);
  const auto t0 = required<double>(n, path, "t_start", ctx, as_real);
  const auto t1 = required<double>(n, path, "t_end", ctx, as_real);
  const YAML::Node np = n["n_points"];
  std::optional<long long> count;
  if (!np) {
    ctx.error(join(path, "n_points"), "missing required key");
  } else {
    count = as_integer(np, join(path, "n_points"), ctx);
  }
  if (!t0 || !t1 || !count) return;
  if (*t0 < 0.0) ctx.error(join(path, "t_start"), "must be non-negative");
  if (*count < 2) ctx.error(join(path, "n_points"), "need at least 2 points");
  if (!(*t1 > *t0)) ctx.error(path, "grid must be strictly increasing (t_end > t_start)");
  cfg.time_grid = {*t0, *t1, static_cast<int>(*count)};
}

void parse_gaussian_initial(const YAML::Node& n, Index dim, ScenarioConfig& cfg, Context& ctx) {
  const std::string path = "initial_state";
  check_keys(n, path, {"mean", "covariance", "stationary_scale"}, ctx);
  GaussianInitial& init = cfg.gaussian_initial;
  init.mean = RVector::Zero(dim);
  if (n["mean"]) {
    if (auto v = as_real_vector(n["mean"], join(path, "mean"), ctx)) {
      if (v->size() != dim) {
        ctx.error(join(path, "mean"), fmt::format("expected {} entries, got {}", dim, v->size()));
      } else {
        init.mean = *v;
      }
    }
  }
  if (n["stationary_scale"]) {
    if (n["covariance"]) ctx.error(path, "give either covariance or stationary_scale, not both");
    if (auto s = as_real(n["stationary_scale"], join(path, "stationary_scale"), ctx)) {
      if (!(*s >= 1.0)) ctx.error(join(path, "stationary_scale"), "must be at least 1");
      init.stationary_scale = *s;
    }
    return;
  }
  if (auto v = required<RMatrix>(n, path, "covariance", ctx, as_real_matrix)) {
    expect_shape(join(path, "covariance"), v->rows(), v->cols(), dim, dim, ctx);
    init.covariance = *v;
  }
}

void parse_gds_model(const YAML::Node& n, ScenarioConfig& cfg, Context& ctx) {
  const std::string path = "model";
  check_keys(n, path, {"n_modes", "b", "xi", "lindblad_vectors"}, ctx);
  const YAML::Node nm = n["n_modes"];
  if (!nm) {
    ctx.error(join(path, "n_modes"), "missing required key");
    return;
  }
  const auto modes = as_integer(nm, join(path, "n_modes"), ctx);
  if (!modes) return;
  if (*modes < 1) {
    ctx.error(join(path, "n_modes"), "must be at least 1");
    return;
  }
  GdsSpec& g = cfg.gds;
  g.n_modes = static_cast<Index>(*modes);
  const Index dim = 2 * g.n_modes;
  g.b_matrix = RMatrix::Zero(dim, dim);
  g.xi = RVector::Zero(dim);
  if (n["b"]) {
    if (auto b = as_real_matrix(n["b"], join(path, "b"), ctx)) {
      expect_shape(join(path, "b"), b->rows(), b->cols(), dim, dim, ctx);
      g.b_matrix = *b;
    }
  }
  if (n["xi"]) {
    if (auto xi = as_real_vector(n["xi"], join(path, "xi"), ctx)) {
      if (xi->size() != dim) {
        ctx.error(join(path, "xi"), fmt::format("expected {} entries, got {}", dim, xi->size()));
      } else {
        g.xi = *xi;
      }
    }
  }
  if (const YAML::Node ls = n["lindblad_vectors"]) {
    if (!ls.IsSequence()) {
      ctx.error(join(path, "lindblad_vectors"), "expected a list of vectors");
    } else {
      for (std::size_t i = 0; i < ls.size(); ++i) {
        const std::string p = index(join(path, "lindblad_vectors"), i);
        if (auto v = as_complex_vector(ls[i], p, ctx)) {
          if (v->size() != dim) {
            ctx.error(p, fmt::format("expected {} entries, got {}", dim, v->size()));
          } else {
            g.lindblad_vectors.push_back(*v);
          }
        }
      }
    }
  }
}

void parse_finite_model(const YAML::Node& model, const YAML::Node& init, ScenarioConfig& cfg, Context& ctx) {
  check_keys(model, "model", {"hamiltonian", "lindblad_operators"}, ctx);
  FiniteSpec& f = cfg.finite;
  const auto h = required<CMatrix>(model, "model", "hamiltonian", ctx, as_complex_matrix);
  if (!h) return;
  const Index d = h->rows();
  expect_shape("model.hamiltonian", h->rows(), h->cols(), d, d, ctx);
  f.hamiltonian = *h;
  if (const YAML::Node ls = model["lindblad_operators"]) {
    if (!ls.IsSequence()) {
      ctx.error("model.lindblad_operators", "expected a list of matrices");
    } else {
      for (std::size_t i = 0; i < ls.size(); ++i) {
        const std::string p = index("model.lindblad_operators", i);
        if (auto l = as_complex_matrix(ls[i], p, ctx)) {
          expect_shape(p, l->rows(), l->cols(), d, d, ctx);
          f.lindblad_operators.push_back(*l);
        }
      }
    }
  }
  check_keys(init, "initial_state", {"density"}, ctx);
  if (auto rho = required<CMatrix>(init, "initial_state", "density", ctx, as_complex_matrix)) {
    expect_shape("initial_state.density", rho->rows(), rho->cols(), d, d, ctx);
    f.initial_density = *rho;
  }
}

void parse_ou_model(const YAML::Node& model, const YAML::Node& init, const YAML::Node& mc, ScenarioConfig& cfg,
                    Context& ctx) {
  check_keys(model, "model", {"drift", "noise", "offset"}, ctx);
  OuSpec& o = cfg.ou;
  const auto a = required<RMatrix>(model, "model", "drift", ctx, as_real_matrix);
  const auto s = required<RMatrix>(model, "model", "noise", ctx, as_real_matrix);
  if (!a || !s) return;
  const Index n = a->rows();
  expect_shape("model.drift", a->rows(), a->cols(), n, n, ctx);
  if (s->rows() != n) ctx.error("model.noise", fmt::format("expected {} rows, got {}", n, s->rows()));
  o.drift = *a;
  o.noise = *s;
  o.offset = RVector::Zero(n);
  if (model["offset"]) {
    if (auto xi = as_real_vector(model["offset"], "model.offset", ctx)) {
      if (xi->size() != n) {
        ctx.error("model.offset", fmt::format("expected {} entries, got {}", n, xi->size()));
      } else {
        o.offset = *xi;
      }
    }
  }
  check_keys(init, "initial_state", {"mean", "covariance"}, ctx);
  cfg.gaussian_initial.mean = RVector::Zero(n);
  if (init["mean"]) {
    if (auto v = as_real_vector(init["mean"], "initial_state.mean", ctx)) {
      if (v->size() != n) {
        ctx.error("initial_state.mean", fmt::format("expected {} entries, got {}", n, v->size()));
      } else {
        cfg.gaussian_initial.mean = *v;
      }
    }
  }
  if (auto c = required<RMatrix>(init, "initial_state", "covariance", ctx, as_real_matrix)) {
    expect_shape("initial_state.covariance", c->rows(), c->cols(), n, n, ctx);
    cfg.gaussian_initial.covariance = *c;
  }
  if (mc) {
    check_keys(mc, "monte_carlo", {"paths", "step"}, ctx);
    if (auto p = required<long long>(mc, "monte_carlo", "paths", ctx, as_integer)) {
      if (*p < 2) ctx.error("monte_carlo.paths", "need at least 2 paths");
      o.mc_paths = static_cast<Index>(*p);
    }
    if (mc["step"]) {
      if (auto st = as_real(mc["step"], "monte_carlo.step", ctx)) {
        if (!(*st > 0.0)) ctx.error("monte_carlo.step", "must be positive");
        o.mc_step = *st;
      }
    }
  }
}

// Builds the library objects once so that their own checks (non-PSD B,
// invalid density, fluctuation-dissipation violation) surface as config errors.
void semantic_checks(const ScenarioConfig& cfg, Context& ctx) {
  try {
    switch (cfg.kind) {
      case ScenarioKind::Gds:
      case ScenarioKind::CrossValidate: {
        const GdsModel m(cfg.gds.n_modes, cfg.hbar, cfg.gds.b_matrix, cfg.gds.xi, cfg.gds.lindblad_vectors);
        if (!cfg.gaussian_initial.stationary_scale) {
          try {
            GaussianState(cfg.gaussian_initial.mean, cfg.gaussian_initial.covariance);
          } catch (const Error& e) {
            ctx.error("initial_state", e.what());
          }
        }
        break;
      }
      case ScenarioKind::FiniteLindblad: {
        const LindbladModel m(HermitianMatrix(cfg.finite.hamiltonian, 1e-10), cfg.finite.lindblad_operators, cfg.hbar);
        try {
          DensityMatrix(cfg.finite.initial_density, DensityTolerance{1e-10, 1e-10, 1e-9});
        } catch (const Error& e) {
          ctx.error("initial_state.density", e.what());
        }
        break;
      }
      case ScenarioKind::ClassicalOu: {
        const OuModel m(cfg.ou.drift, cfg.ou.noise, cfg.ou.offset);
        try {
          GaussianDensity(cfg.gaussian_initial.mean, cfg.gaussian_initial.covariance);
        } catch (const Error& e) {
          ctx.error("initial_state", e.what());
        }
        break;
      }
    }
  } catch (const Error& e) {
    ctx.error("model", e.what());
  }
}

}  // namespace

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::FiniteLindblad:
      return "finite_lindblad";
    case ScenarioKind::Gds:
      return "gds";
    case ScenarioKind::ClassicalOu:
      return "classical_ou";
    case ScenarioKind::CrossValidate:
      return "cross_validate";
  }
  return "?";
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> out(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    out[static_cast<std::size_t>(i)] =
        i == n_points - 1 ? t_end : t_start + (t_end - t_start) * i / static_cast<double>(n_points - 1);
  }
  return out;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string s = "invalid scenario configuration:";
        for (const auto& p : problems) s += "\n  " + p;
        return s;
      }()),
      problems_(std::move(problems)) {}

ScenarioConfig parse_config(const std::string& text, const std::string& origin, bool strict,
                            std::vector<std::string>* warnings) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError({fmt::format("{}: parse error: {}", origin, e.what())});
  }
  if (!root.IsMap()) throw ConfigError({origin + ": expected a table of keys at the top level"});

  Context ctx;
  ScenarioConfig cfg;
  check_keys(root, "",
             {"name", "kind", "hbar", "time_grid", "fd_step", "seed", "output_path", "cutoff", "model",
              "initial_state", "monte_carlo", "expect"},
             ctx);

  cfg.name = root["name"] ? root["name"].as<std::string>() : std::filesystem::path(origin).stem().string();
  const auto kind = required<ScenarioKind>(root, "", "kind", ctx, parse_kind);
  if (auto h = required<double>(root, "", "hbar", ctx, as_real)) {
    if (!(*h > 0.0)) ctx.error("hbar", "must be positive");
    cfg.hbar = *h;
  }
  parse_time_grid(root["time_grid"], cfg, ctx);
  if (root["fd_step"]) {
    if (auto h = as_real(root["fd_step"], "fd_step", ctx)) {
      if (!(*h > 0.0)) ctx.error("fd_step", "must be positive");
      cfg.fd_step = *h;
    }
  }
  if (root["seed"]) {
    if (auto s = as_integer(root["seed"], "seed", ctx)) {
      if (*s < 0) ctx.error("seed", "must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(*s);
    }
  }
  cfg.output_path = root["output_path"] ? root["output_path"].as<std::string>() : cfg.name;
  if (root["cutoff"]) {
    if (auto c = as_integer(root["cutoff"], "cutoff", ctx)) {
      if (*c < 5) ctx.error("cutoff", "must be at least 5");
      cfg.cutoff = static_cast<Index>(*c);
    }
  }
  if (const YAML::Node e = root["expect"]) {
    check_keys(e, "expect", {"psi_zero", "reaches_stationary"}, ctx);
    if (e["psi_zero"]) cfg.expect.psi_zero = as_bool(e["psi_zero"], "expect.psi_zero", ctx);
    if (e["reaches_stationary"]) {
      cfg.expect.reaches_stationary = as_bool(e["reaches_stationary"], "expect.reaches_stationary", ctx);
    }
  }

  const YAML::Node model = root["model"];
  const YAML::Node init = root["initial_state"];
  if (!model || !model.IsMap()) ctx.error("model", "missing required table");
  if (!init || !init.IsMap()) ctx.error("initial_state", "missing required table");
  if (kind) {
    cfg.kind = *kind;
    if (root["monte_carlo"] && cfg.kind != ScenarioKind::ClassicalOu) {
      ctx.error("monte_carlo", "only valid for kind classical_ou");
    }
    if (model && model.IsMap() && init && init.IsMap()) {
      switch (cfg.kind) {
        case ScenarioKind::Gds:
        case ScenarioKind::CrossValidate:
          parse_gds_model(model, cfg, ctx);
          if (ctx.errors.empty()) parse_gaussian_initial(init, 2 * cfg.gds.n_modes, cfg, ctx);
          break;
        case ScenarioKind::FiniteLindblad:
          parse_finite_model(model, init, cfg, ctx);
          break;
        case ScenarioKind::ClassicalOu:
          parse_ou_model(model, init, root["monte_carlo"], cfg, ctx);
          break;
      }
    }
  }
  if (ctx.errors.empty()) semantic_checks(cfg, ctx);

  if (strict) {
    ctx.errors.insert(ctx.errors.end(), ctx.unknown.begin(), ctx.unknown.end());
  } else if (warnings != nullptr) {
    *warnings = ctx.unknown;
  }
  if (!ctx.errors.empty()) {
    for (auto& e : ctx.errors) e = origin + ": " + e;
    throw ConfigError(std::move(ctx.errors));
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path, bool strict, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({path.string() + ": cannot open file"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), strict, warnings);
}

}  // namespace qdb::tools
