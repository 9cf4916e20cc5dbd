#include "sonoclass/model_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "sonoclass/error.hpp"

namespace sonoclass {
namespace {

constexpr std::string_view kHeader = "SONOCLASS-MODEL v1";

void append_row(std::string& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_double(values[i]);
  }
  out += '\n';
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::string_view line() {
    if (pos_ >= text_.size()) fail("unexpected end of model file");
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    std::string_view l = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_no_;
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    return l;
  }

  std::vector<std::string_view> fields() {
    std::vector<std::string_view> out;
    const std::string_view l = line();
    std::size_t i = 0;
    while (i < l.size()) {
      while (i < l.size() && l[i] == ' ') ++i;
      const std::size_t start = i;
      while (i < l.size() && l[i] != ' ') ++i;
      if (i > start) out.push_back(l.substr(start, i - start));
    }
    return out;
  }

  // "tag v1 v2 ..." with the expected tag and field count.
  std::vector<std::string_view> record(std::string_view tag, std::size_t n_values) {
    auto f = fields();
    if (f.empty() || f[0] != tag || f.size() != n_values + 1) {
      fail(fmt::format("expected '{}' with {} values", tag, n_values));
    }
    f.erase(f.begin());
    return f;
  }

  std::vector<double> doubles(std::size_t n) {
    const auto f = fields();
    if (f.size() != n) fail(fmt::format("expected {} numbers, found {}", n, f.size()));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = to_double(f[i]);
    return out;
  }

  double to_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(fmt::format("bad number '{}'", s));
    return v;
  }

  std::size_t to_size(std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(fmt::format("bad count '{}'", s));
    return v;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(Errc::kModelFormat, fmt::format("model line {}: {}", line_no_, why));
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace

std::string serialize_model(const TrainedModel& m) {
  const OvoModel& ovo = m.ovo;
  std::string out(kHeader);
  out += '\n';
  const std::string config = to_config_text(m.config);
  const auto config_lines = static_cast<std::size_t>(std::count(config.begin(), config.end(), '\n'));
  out += fmt::format("config {}\n{}", config_lines, config);
  out += fmt::format("classes {}\n", m.class_names.size());
  for (const auto& name : m.class_names) out += name + '\n';
  out += fmt::format("feature_dim {}\n", m.feature_dim);

  const MiSelection& sel = ovo.selection;
  out += fmt::format("selection {} {} {}\n", sel.input_dim, sel.n_bins, sel.selected.size());
  for (std::size_t idx : sel.selected) {
    out += fmt::format("{} {} {} {}\n", idx, format_double(sel.scores.at(idx)),
                       format_double(sel.edges.at(idx).lo), format_double(sel.edges.at(idx).hi));
  }

  out += fmt::format("scaler {}\n", ovo.scaler.dims());
  append_row(out, ovo.scaler.lo);
  append_row(out, ovo.scaler.hi);

  if (m.patches) {
    out += fmt::format("patches {} {}\n", m.patches->patches.size(), m.patches->seed);
    for (const Patch& p : m.patches->patches) {
      out += fmt::format("patch {} {} {} {} {}\n", p.size, p.scale, p.source, p.row, p.col);
      for (const RealMatrix& v : p.values) append_row(out, v.flat());
    }
  } else {
    out += "patches none\n";
  }

  out += fmt::format("pairs {}\n", ovo.pairs.size());
  for (const PairModel& pm : ovo.pairs) {
    const BinarySvmModel& b = pm.model;
    out += fmt::format("pair {} {} {} {} {} {} {} {} {}\n", pm.class_a, pm.class_b,
                       format_double(b.params.c), format_double(b.params.gamma),
                       format_double(b.bias), b.converged ? 1 : 0, b.iterations,
                       b.support_vectors.rows(), b.support_vectors.cols());
    append_row(out, b.dual_weights);
    for (std::size_t r = 0; r < b.support_vectors.rows(); ++r) append_row(out, b.support_vectors.row(r));
  }
  out += "end\n";
  return out;
}

TrainedModel parse_model(std::string_view text) {
  Reader in(text);
  if (in.line() != kHeader) in.fail("not a sonoclass model file");
  TrainedModel m;

  const std::size_t config_lines = in.to_size(in.record("config", 1)[0]);
  std::string config;
  for (std::size_t i = 0; i < config_lines; ++i) {
    config += in.line();
    config += '\n';
  }
  try {
    m.config = parse_config(config);
  } catch (const Error& e) {
    in.fail(e.what());
  }

  const std::size_t k = in.to_size(in.record("classes", 1)[0]);
  for (std::size_t i = 0; i < k; ++i) m.class_names.emplace_back(in.line());
  m.feature_dim = in.to_size(in.record("feature_dim", 1)[0]);

  OvoModel& ovo = m.ovo;
  for (std::size_t i = 0; i < k; ++i) ovo.classes.push_back(static_cast<int>(i));
  {
    const auto f = in.record("selection", 3);
    MiSelection& sel = ovo.selection;
    sel.input_dim = in.to_size(f[0]);
    sel.n_bins = static_cast<int>(in.to_size(f[1]));
    const std::size_t count = in.to_size(f[2]);
    if (count > 0) {
      sel.scores.assign(sel.input_dim, 0.0);
      sel.edges.assign(sel.input_dim, BinEdges{});
    }
    for (std::size_t i = 0; i < count; ++i) {
      const auto row = in.fields();
      if (row.size() != 4) in.fail("selection entry needs index, score, lo, hi");
      const std::size_t idx = in.to_size(row[0]);
      if (idx >= sel.input_dim) in.fail("selected index out of range");
      sel.selected.push_back(idx);
      sel.scores[idx] = in.to_double(row[1]);
      sel.edges[idx] = {in.to_double(row[2]), in.to_double(row[3])};
    }
  }
  {
    const std::size_t dims = in.to_size(in.record("scaler", 1)[0]);
    ovo.scaler.lo = in.doubles(dims);
    ovo.scaler.hi = in.doubles(dims);
  }
  {
    const auto f = in.fields();
    if (f.size() == 2 && f[0] == "patches" && f[1] == "none") {
      // no patches
    } else if (f.size() == 3 && f[0] == "patches") {
      PatchSet set;
      const std::size_t n = in.to_size(f[1]);
      set.seed = in.to_size(f[2]);
      for (std::size_t i = 0; i < n; ++i) {
        const auto pf = in.record("patch", 5);
        Patch p;
        p.size = in.to_size(pf[0]);
        p.scale = in.to_size(pf[1]);
        p.source = in.to_size(pf[2]);
        p.row = in.to_size(pf[3]);
        p.col = in.to_size(pf[4]);
        for (RealMatrix& v : p.values) {
          const auto vals = in.doubles(p.size * p.size);
          v = RealMatrix(p.size, p.size);
          std::copy(vals.begin(), vals.end(), v.flat().begin());
        }
        set.patches.push_back(std::move(p));
      }
      m.patches = std::move(set);
    } else {
      in.fail("expected a patches record");
    }
  }
  {
    const std::size_t n_pairs = in.to_size(in.record("pairs", 1)[0]);
    for (std::size_t p = 0; p < n_pairs; ++p) {
      const auto f = in.record("pair", 9);
      PairModel pm;
      pm.class_a = in.to_size(f[0]);
      pm.class_b = in.to_size(f[1]);
      if (pm.class_a >= k || pm.class_b >= k || pm.class_a >= pm.class_b) in.fail("bad class pair");
      BinarySvmModel& b = pm.model;
      b.params.c = in.to_double(f[2]);
      b.params.gamma = in.to_double(f[3]);
      b.bias = in.to_double(f[4]);
      b.converged = in.to_size(f[5]) != 0;
      b.iterations = in.to_size(f[6]);
      const std::size_t n_sv = in.to_size(f[7]);
      const std::size_t dims = in.to_size(f[8]);
      b.dual_weights = in.doubles(n_sv);
      b.support_vectors = RealMatrix(n_sv, dims);
      for (std::size_t r = 0; r < n_sv; ++r) {
        const auto row = in.doubles(dims);
        std::copy(row.begin(), row.end(), b.support_vectors.row(r).begin());
      }
      ovo.pairs.push_back(std::move(pm));
    }
    if (n_pairs != k * (k - 1) / 2) in.fail("pair count does not match the class count");
  }
  if (in.line() != "end") in.fail("missing end marker");
  return m;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write model " + path.string());
  out << serialize_model(model);
  if (!out) throw Error(Errc::kIo, "cannot write model " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open model " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace sonoclass
