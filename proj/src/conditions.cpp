#include "mtsa/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace mtsa {

AffineCascade::AffineCascade(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  const std::size_t n = dims_.size();
  for (std::size_t d : dims_)
    if (d == 0) throw ConfigError("cascade block dimensions must be >= 1");
  blocks_.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) blocks_.emplace_back(dims_[i], dims_[j]);
  for (std::size_t i = 0; i < n; ++i) offsets_.emplace_back(dims_[i], 0.0);
}

std::size_t AffineCascade::total_dim() const {
  std::size_t s = 0;
  for (std::size_t d : dims_) s += d;
  return s;
}

std::size_t AffineCascade::offset_of(std::size_t level) const {
  std::size_t s = 0;
  for (std::size_t k = 0; k < level; ++k) s += dims_[k];
  return s;
}

void AffineCascade::set_block(std::size_t i, std::size_t j, Matrix m) {
  if (m.rows() != dims_.at(i) || m.cols() != dims_.at(j)) {
    throw ConfigError("cascade block (" + std::to_string(i) + "," + std::to_string(j) +
                      ") has inconsistent shape");
  }
  if (!m.all_finite()) throw ConfigError("cascade block entries must be finite");
  blocks_[i * levels() + j] = std::move(m);
}

void AffineCascade::set_offset(std::size_t i, Vector c) {
  if (c.size() != dims_.at(i)) throw ConfigError("cascade offset has inconsistent length");
  for (double v : c)
    if (!std::isfinite(v)) throw ConfigError("cascade offset entries must be finite");
  offsets_[i] = std::move(c);
}

Vector AffineCascade::evaluate(std::size_t i, const Blocks& x) const {
  Vector h = offsets_[i];
  for (std::size_t j = 0; j < levels(); ++j) axpy(1.0, block(i, j) * x[j], h);
  return h;
}

Blocks AffineCascade::evaluate(const Blocks& x) const {
  Blocks h;
  for (std::size_t i = 0; i < levels(); ++i) h.push_back(evaluate(i, x));
  return h;
}

Matrix AffineCascade::stacked_matrix() const {
  Matrix m(total_dim(), total_dim());
  for (std::size_t i = 0; i < levels(); ++i)
    for (std::size_t j = 0; j < levels(); ++j) m.set_block(offset_of(i), offset_of(j), block(i, j));
  return m;
}

Vector AffineCascade::stacked_offset() const {
  Vector c;
  for (const auto& o : offsets_) c.insert(c.end(), o.begin(), o.end());
  return c;
}

Blocks AffineCascade::split(const Vector& stacked) const {
  Blocks out;
  std::size_t pos = 0;
  for (std::size_t d : dims_) {
    out.emplace_back(stacked.begin() + pos, stacked.begin() + pos + d);
    pos += d;
  }
  return out;
}

double AffineCascade::lipschitz_bound(std::size_t i) const {
  Matrix row(dims_[i], total_dim());
  for (std::size_t j = 0; j < levels(); ++j) row.set_block(0, offset_of(j), block(i, j));
  return norm_inf(row);
}

AffineCascade AffineCascade::from_json(const nlohmann::json& j) {
  try {
    AffineCascade cas(j.at("dims").get<std::vector<std::size_t>>());
    if (j.contains("blocks")) {
      for (const auto& [key, value] : j.at("blocks").items()) {
        const auto comma = key.find(',');
        if (comma == std::string::npos) throw ConfigError("block key must be \"i,j\": " + key);
        const std::size_t bi = std::stoul(key.substr(0, comma));
        const std::size_t bj = std::stoul(key.substr(comma + 1));
        if (bi < 1 || bj < 1 || bi > cas.levels() || bj > cas.levels()) {
          throw ConfigError("block key out of range (indices are 1-based): " + key);
        }
        cas.set_block(bi - 1, bj - 1, Matrix::from_rows(value.get<std::vector<Vector>>()));
      }
    }
    if (j.contains("offsets")) {
      const auto offs = j.at("offsets").get<std::vector<Vector>>();
      if (offs.size() != cas.levels()) throw ConfigError("one offset vector per level required");
      for (std::size_t i = 0; i < offs.size(); ++i) cas.set_offset(i, offs[i]);
    }
    return cas;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid cascade document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid cascade document: ") + e.what());
  }
}

nlohmann::json AffineCascade::to_json() const {
  nlohmann::json j;
  j["dims"] = dims_;
  nlohmann::json blocks = nlohmann::json::object();
  for (std::size_t i = 0; i < levels(); ++i)
    for (std::size_t k = 0; k < levels(); ++k) {
      const Matrix& m = block(i, k);
      if (std::all_of(m.entries().begin(), m.entries().end(), [](double v) { return v == 0.0; }))
        continue;
      std::vector<Vector> rows;
      for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row(r));
      blocks[std::to_string(i + 1) + "," + std::to_string(k + 1)] = rows;
    }
  j["blocks"] = blocks;
  j["offsets"] = offsets_;
  return j;
}

Vector AffineMap::apply(std::span<const double> x) const {
  Vector y = linear.cols() == 0 ? Vector(linear.rows(), 0.0) : linear * x;
  axpy(1.0, offset, y);
  return y;
}

NotHurwitz::NotHurwitz(std::size_t level, HurwitzDiagnosis diag)
    : Error("level " + std::to_string(level + 1) + " reduced matrix is not Hurwitz (" +
            diag.detail + ", max symmetric eigenvalue " + std::to_string(diag.max_sym_eig) + ")"),
      level_(level),
      diag_(std::move(diag)) {}

namespace {

struct LevelData {
  Matrix reduced;   // d_i x (dims of levels i..N-1)
  Vector offset;    // reduced offset
  Matrix a;         // coefficient of x_i
  HurwitzDiagnosis diag;
  std::optional<AffineMap> lambda;
};

struct Reduction {
  std::vector<LevelData> levels;
  std::optional<std::size_t> failed;
  // Expressions of already eliminated levels over the remaining variables.
  std::vector<AffineMap> exprs;
};

// Substitutes the eliminated levels into h_i; returns the reduced coefficient
// matrix over variables i..N-1 and the reduced offset.
std::pair<Matrix, Vector> reduced_drift(const AffineCascade& cas, std::size_t i,
                                        const std::vector<AffineMap>& exprs, bool with_offsets) {
  const std::size_t base = cas.offset_of(i);
  const std::size_t rest = cas.total_dim() - base;
  Matrix r(cas.dims()[i], rest);
  for (std::size_t k = i; k < cas.levels(); ++k) r.set_block(0, cas.offset_of(k) - base, cas.block(i, k));
  Vector off = with_offsets ? cas.offset(i) : Vector(cas.dims()[i], 0.0);
  for (std::size_t j = 0; j < i; ++j) {
    const Matrix& mij = cas.block(i, j);
    r += mij * exprs[j].linear;
    axpy(1.0, mij * exprs[j].offset, off);
  }
  return {std::move(r), std::move(off)};
}

Reduction reduce(const AffineCascade& cas, std::size_t last, bool with_offsets) {
  Reduction red;
  for (std::size_t i = 0; i <= last; ++i) {
    const std::size_t di = cas.dims()[i];
    auto [r, off] = reduced_drift(cas, i, red.exprs, with_offsets);
    LevelData ld;
    ld.a = r.block(0, 0, di, di);
    ld.diag = diagnose_hurwitz(ld.a);
    ld.reduced = r;
    ld.offset = off;
    if (!ld.diag.hurwitz) {
      red.levels.push_back(std::move(ld));
      red.failed = i;
      return red;
    }
    const std::size_t slower = r.cols() - di;
    const Matrix b = r.block(0, di, di, slower);
    // lambda_i(x_{i+1..}) = -A^{-1} (B x + off)
    Matrix rhs(di, slower + 1);
    rhs.set_block(0, 0, b);
    rhs.set_block(0, slower, Matrix::column(off));
    const Matrix sol = -solve(ld.a, rhs);
    AffineMap lam{i + 1, sol.block(0, 0, di, slower), sol.col(slower)};

    for (auto& e : red.exprs) {
      const Matrix coef_i = e.linear.block(0, 0, e.linear.rows(), di);
      Matrix lin = e.linear.block(0, di, e.linear.rows(), slower);
      lin += coef_i * lam.linear;
      axpy(1.0, coef_i * lam.offset, e.offset);
      e.linear = std::move(lin);
      e.first_var = i + 1;
    }
    red.exprs.push_back(lam);
    if (i + 1 < cas.levels()) ld.lambda = lam;
    red.levels.push_back(std::move(ld));
  }
  return red;
}

LevelVerdict make_verdict(const AffineCascade& cas, std::size_t i, const Reduction& orig,
                          const Reduction& scaled) {
  LevelVerdict v;
  v.level = i;
  const auto& lo = orig.levels.at(i);
  v.reduced_matrix = lo.a;
  v.diagnosis = lo.diag;
  v.original_clause = lo.diag.hurwitz;
  v.lambda = lo.lambda;
  if (i < scaled.levels.size()) {
    const auto& ls = scaled.levels[i];
    v.scaled_clause = ls.diag.hurwitz;
    v.lambda_inf = ls.lambda;
    if (ls.lambda) {
      v.lambda_inf_vanishes = norm_inf(ls.lambda->offset) == 0.0;
      v.scaled_clause = v.scaled_clause && v.lambda_inf_vanishes;
    } else {
      v.lambda_inf_vanishes = ls.diag.hurwitz;
    }
  }
  v.scaled_gap_coefficient = norm2(cas.offset(i));
  return v;
}

}  // namespace

AffineMap scaled_drift_limit(const AffineCascade& cas, std::size_t level) {
  if (level >= cas.levels()) throw std::out_of_range("scaled_drift: level out of range");
  std::vector<AffineMap> exprs;
  if (level > 0) {
    Reduction red = reduce(cas, level - 1, false);
    if (red.failed) {
      throw ReductionError("level " + std::to_string(*red.failed + 1) +
                           " is not Hurwitz; lambda_inf undefined");
    }
    exprs = std::move(red.exprs);
  }
  auto [r, off] = reduced_drift(cas, level, exprs, false);
  return AffineMap{level, std::move(r), std::move(off)};
}

AffineMap scaled_drift(const AffineCascade& cas, std::size_t level, double c) {
  if (!(c >= 1.0)) throw std::invalid_argument("scaled_drift: c must be >= 1");
  AffineMap m = scaled_drift_limit(cas, level);
  m.offset = scaled(cas.offset(level), 1.0 / c);
  return m;
}

LevelVerdict check_level(const AffineCascade& cas, std::size_t level) {
  if (level >= cas.levels()) throw std::out_of_range("check_level: level out of range");
  const Reduction orig = reduce(cas, level, true);
  const Reduction scaled = reduce(cas, level, false);
  for (const Reduction* red : {&orig, &scaled}) {
    if (red->failed && *red->failed < level) {
      throw ReductionError("faster level " + std::to_string(*red->failed + 1) + " failed");
    }
  }
  LevelVerdict v = make_verdict(cas, level, orig, scaled);
  if (!v.pass()) throw NotHurwitz(level, v.diagnosis);
  return v;
}

CascadeReport analyze_cascade(const AffineCascade& cas) {
  CascadeReport rep;
  if (cas.levels() == 0) return rep;
  const std::size_t last = cas.levels() - 1;
  const Reduction orig = reduce(cas, last, true);
  const Reduction scaled = reduce(cas, last, false);
  const std::size_t reached = std::min(orig.levels.size(), scaled.levels.size());
  for (std::size_t i = 0; i < reached; ++i) {
    rep.levels.push_back(make_verdict(cas, i, orig, scaled));
    if (!rep.levels.back().pass()) {
      rep.failing_level = i;
      return rep;
    }
  }
  if (orig.failed || scaled.failed) {
    rep.failing_level = std::min(orig.failed.value_or(last), scaled.failed.value_or(last));
    return rep;
  }
  rep.passed = true;
  for (const auto& e : orig.exprs) rep.fixed_point.push_back(e.offset);
  const Blocks h = cas.evaluate(rep.fixed_point);
  for (const auto& hi : h) rep.residual = std::max(rep.residual, norm_inf(hi));
  return rep;
}

CascadeReport cascade_fixed_point(const AffineCascade& cas) {
  CascadeReport rep = analyze_cascade(cas);
  if (!rep.passed) {
    const std::size_t i = rep.failing_level.value_or(0);
    HurwitzDiagnosis d = i < rep.levels.size() ? rep.levels[i].diagnosis : HurwitzDiagnosis{};
    throw NotHurwitz(i, d);
  }
  return rep;
}

std::string CascadeReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "level  dim  hurwitz  marginal  max_sym_eig   scaled(B)  original(C)\n";
  for (const auto& v : levels) {
    os << std::setw(5) << v.level + 1 << std::setw(5) << v.reduced_matrix.rows() << std::setw(9)
       << (v.diagnosis.hurwitz ? "yes" : "no") << std::setw(10) << (v.diagnosis.marginal ? "yes" : "no")
       << std::setw(13) << v.diagnosis.max_sym_eig << std::setw(12) << (v.scaled_clause ? "pass" : "FAIL")
       << std::setw(13) << (v.original_clause ? "pass" : "FAIL") << "\n";
  }
  if (passed) {
    os << "all levels pass; fixed point:\n";
    for (std::size_t i = 0; i < fixed_point.size(); ++i) {
      os << "  x" << i + 1 << "* = " << to_string(fixed_point[i], 10) << "\n";
    }
    os << "  residual max|h(x*)| = " << residual << "\n";
  } else {
    os << "FAILED at level " << failing_level.value_or(0) + 1 << "\n";
  }
  return os.str();
}

nlohmann::json CascadeReport::to_json() const {
  auto map_json = [](const std::optional<AffineMap>& m) -> nlohmann::json {
    if (!m) return nullptr;
    std::vector<Vector> rows;
    for (std::size_t r = 0; r < m->linear.rows(); ++r) rows.push_back(m->linear.row(r));
    return {{"matrix", rows}, {"offset", m->offset}};
  };
  nlohmann::json j;
  j["passed"] = passed;
  j["failing_level"] = failing_level ? nlohmann::json(*failing_level + 1) : nlohmann::json(nullptr);
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& v : levels) {
    lv.push_back({{"level", v.level + 1},
                  {"hurwitz", v.diagnosis.hurwitz},
                  {"marginal", v.diagnosis.marginal},
                  {"max_sym_eig", v.diagnosis.max_sym_eig},
                  {"scaled_clause", v.scaled_clause},
                  {"original_clause", v.original_clause},
                  {"lambda_inf_vanishes", v.lambda_inf_vanishes},
                  {"scaled_gap_coefficient", v.scaled_gap_coefficient},
                  {"lambda", map_json(v.lambda)},
                  {"lambda_inf", map_json(v.lambda_inf)}});
  }
  j["levels"] = lv;
  if (passed) {
    j["fixed_point"] = fixed_point;
    j["residual"] = residual;
  }
  return j;
}

SaSystem cascade_system(const AffineCascade& cas, std::vector<StepSize> steps, double sigma) {
  SaSystem sys;
  sys.dims = cas.dims();
  sys.steps = std::move(steps);
  sys.drift = [cas, sigma](std::uint64_t, const Blocks& x, Rng& rng) {
    SampledUpdate u{cas.evaluate(x)};
    if (sigma != 0.0)
      for (auto& b : u.g)
        for (double& v : b) v += sigma * rng.normal();
    return u;
  };
  return sys;
}

}  // namespace mtsa
