#include "problems.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace fossils {

LeastSquaresProblem generate_random_problem(std::size_t m, std::size_t n, double kappa,
                                            double resid_norm, std::uint64_t seed) {
  if (n == 0 || m < n) {
    fail(ErrorCode::dimension, "random problem needs m >= n >= 1, got " + std::to_string(m) +
                                   "x" + std::to_string(n));
  }
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) fail(ErrorCode::parameter, "kappa must be >= 1");
  if (!(resid_norm >= 0.0) || !std::isfinite(resid_norm)) {
    fail(ErrorCode::parameter, "residual norm must be >= 0");
  }
  if (resid_norm > 0.0 && m == n) {
    fail(ErrorCode::parameter, "a nonzero residual needs m > n (range(A) is all of R^m)");
  }

  Rng rng(seed);
  DenseMatrix u = haar_orthonormal(m, n, rng);
  const DenseMatrix v = haar_orthonormal(n, n, rng);

  Vector sigma(n, 1.0);
  for (std::size_t i = 1; i < n; ++i) {
    sigma[i] = std::pow(kappa, -static_cast<double>(i) / static_cast<double>(n - 1));
  }
  DenseMatrix us = u;
  for (std::size_t j = 0; j < n; ++j) scale(sigma[j], us.col(j));

  LeastSquaresProblem p;
  p.a = matmul(us, v.transposed());
  p.kappa_target = kappa;
  p.resid_target = resid_norm;
  p.seed = seed;

  Vector x = rng.normal_vector(n);
  scale(1.0 / norm2(x), x);
  p.b = matvec(p.a, x);

  if (resid_norm > 0.0) {
    Vector g = rng.normal_vector(m);
    // Project twice: one pass leaves O(u) components in range(U).
    for (int pass = 0; pass < 2; ++pass) {
      const Vector c = matvec_t(u, g);
      axpy(-1.0, matvec(u, c), g);
    }
    scale(resid_norm / norm2(g), g);
    axpy(1.0, g, p.b);
  }
  p.x_true = std::move(x);
  return p;
}

LeastSquaresProblem difficulty_problem(std::size_t m, std::size_t n, double difficulty,
                                       std::uint64_t seed) {
  if (!(difficulty >= 1.0 && difficulty <= 1e16)) {
    fail(ErrorCode::parameter, "difficulty must lie in [1, 1e16]");
  }
  return generate_random_problem(m, n, difficulty, difficulty * kUnitRoundoff, seed);
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {lo};
  std::vector<double> v(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

ColumnScaling column_scale(const DenseMatrix& a, bool allow_zero) {
  ColumnScaling cs{a, Vector(a.cols())};
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double nrm = norm2(a.col(j));
    if (nrm == 0.0) {
      if (!allow_zero) {
        fail(ErrorCode::parameter, "column_scale: column " + std::to_string(j) + " is zero");
      }
      cs.norms[j] = 1.0;
      continue;
    }
    cs.norms[j] = nrm;
    scale(1.0 / nrm, cs.a_scaled.col(j));
  }
  return cs;
}

Vector unscale_solution(std::span<const double> x_scaled, std::span<const double> norms) {
  if (x_scaled.size() != norms.size()) fail(ErrorCode::dimension, "unscale_solution: sizes");
  Vector x(x_scaled.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = x_scaled[j] / norms[j];
  return x;
}

// ---------------------------------------------------------------------------
// MatrixMarket

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  fail(ErrorCode::parse, "MatrixMarket line " + std::to_string(line) + ": " + what);
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

double parse_number(const std::string& tok, std::size_t line) {
  // strtod accepts the exponent and sign forms MatrixMarket writers emit.
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') parse_error(line, "bad number '" + tok + "'");
  if (!std::isfinite(v)) parse_error(line, "non-finite value '" + tok + "'");
  return v;
}

std::size_t parse_index(const std::string& tok, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    parse_error(line, "bad integer '" + tok + "'");
  }
  return v;
}

}  // namespace

DenseMatrix parse_matrix_market(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) parse_error(1, "empty input");
  ++lineno;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") parse_error(lineno, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") fail(ErrorCode::unsupported, "MatrixMarket object '" + object + "'");
  if (format != "array" && format != "coordinate") {
    parse_error(lineno, "unknown format '" + format + "'");
  }
  if (field == "complex" || field == "pattern") {
    fail(ErrorCode::unsupported, "MatrixMarket field '" + field + "' is not supported");
  }
  if (field != "real" && field != "integer" && field != "double") {
    parse_error(lineno, "unknown field '" + field + "'");
  }
  if (symmetry != "general") {
    fail(ErrorCode::unsupported, "MatrixMarket symmetry '" + symmetry + "' is not supported");
  }

  // Data lines, skipping comments and blanks; each token keeps its line number.
  std::vector<std::pair<std::string, std::size_t>> tokens;
  bool got_size = false;
  std::vector<std::size_t> size;
  std::size_t size_line = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    if (blank(line)) continue;
    std::istringstream ls(line);
    std::string tok;
    if (!got_size) {
      while (ls >> tok) size.push_back(parse_index(tok, lineno));
      size_line = lineno;
      got_size = true;
      continue;
    }
    while (ls >> tok) tokens.emplace_back(tok, lineno);
  }
  if (!got_size) parse_error(lineno, "missing size line");

  const bool array = format == "array";
  if (size.size() != (array ? 2u : 3u)) parse_error(size_line, "malformed size line");
  const std::size_t rows = size[0];
  const std::size_t cols = size[1];
  DenseMatrix a(rows, cols);
  if (array) {
    if (tokens.size() != rows * cols) {
      parse_error(tokens.empty() ? size_line : tokens.back().second,
                  "expected " + std::to_string(rows * cols) + " entries, found " +
                      std::to_string(tokens.size()));
    }
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      a.data()[k] = parse_number(tokens[k].first, tokens[k].second);
    }
  } else {
    const std::size_t nnz = size[2];
    if (tokens.size() != 3 * nnz) {
      parse_error(tokens.empty() ? size_line : tokens.back().second,
                  "expected " + std::to_string(nnz) + " coordinate entries");
    }
    for (std::size_t k = 0; k < nnz; ++k) {
      const auto& [ti, li] = tokens[3 * k];
      const std::size_t i = parse_index(ti, li);
      const std::size_t j = parse_index(tokens[3 * k + 1].first, tokens[3 * k + 1].second);
      if (tokens[3 * k + 1].second != li || tokens[3 * k + 2].second != li) {
        parse_error(li, "coordinate entry must be 'row col value' on one line");
      }
      if (i == 0 || j == 0 || i > rows || j > cols) parse_error(li, "index out of range");
      a(i - 1, j - 1) += parse_number(tokens[3 * k + 2].first, li);
    }
  }
  return a;
}

DenseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_matrix_market(ss.str());
}

std::string format_matrix_market(const DenseMatrix& a, MatrixMarketFormat format) {
  std::string out;
  char buf[64];
  if (format == MatrixMarketFormat::array) {
    out += "%%MatrixMarket matrix array real general\n";
    out += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
    for (double v : a.data()) {
      std::snprintf(buf, sizeof buf, "%.17g\n", v);
      out += buf;
    }
    return out;
  }
  std::size_t nnz = 0;
  for (double v : a.data()) nnz += v != 0.0;
  out += "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + " " + std::to_string(nnz) +
         "\n";
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i)
      if (a(i, j) != 0.0) {
        std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", i + 1, j + 1, a(i, j));
        out += buf;
      }
  return out;
}

void write_matrix_market(const DenseMatrix& a, const std::filesystem::path& path,
                         MatrixMarketFormat format) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write '" + path.string() + "'");
  out << format_matrix_market(a, format);
  if (!out) fail(ErrorCode::io, "write failed for '" + path.string() + "'");
}

}  // namespace fossils
