#include "omnijump/premotion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

namespace omnijump {

namespace {

constexpr const char* kIndexFile = "premotion.index";
constexpr const char* kRecordFile = "premotion.dat";
constexpr const char* kFailureFile = "premotion.failures";
constexpr double kDuplicate = 1e-6;
constexpr double kFeasible = 1e4;

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e && std::isfinite(out);
}

template <class Int>
bool parse_int(const std::string& s, Int& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw LibraryError(p.filename().string(), 0, "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  const std::filesystem::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, " %+.17e", v);
  out += buf;
}

}  // namespace

LibraryError::LibraryError(const std::string& file, std::size_t line, const std::string& what)
    : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

PreMotionLibrary::PreMotionLibrary(double cell) : cell_(cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("PreMotionLibrary: cell size must be positive");
}

std::size_t PreMotionLibrary::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = static_cast<std::uint64_t>(k.mode);
  for (std::int64_t v : {k.i, k.j, k.k}) h = h * 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(v);
  return static_cast<std::size_t>(h ^ (h >> 29));
}

PreMotionLibrary::Key PreMotionLibrary::key(const Eigen::Vector3d& p, JumpMode mode) const {
  return Key{static_cast<int>(mode), static_cast<std::int64_t>(std::floor(p.x() / cell_)),
             static_cast<std::int64_t>(std::floor(p.y() / cell_)),
             static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

bool PreMotionLibrary::contains_id(std::int64_t id) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                                   [](const PreMotionEntry& e, std::int64_t v) { return e.id < v; });
  return it != entries_.end() && it->id == id;
}

void PreMotionLibrary::add(PreMotionEntry entry) {
  if (!entry.target.allFinite() || !std::isfinite(entry.yaw))
    throw std::invalid_argument("library entry target must be finite");
  if (entry.s_pre.mode != entry.mode || entry.s_pre.v.size() != OptVector::dimension(entry.mode))
    throw std::invalid_argument("library entry vector does not match its mode");
  if (!(entry.fitness < kFeasible))
    throw std::invalid_argument("library entry " + std::to_string(entry.id) + " was not feasible");
  if (contains_id(entry.id))
    throw std::invalid_argument("duplicate library id " + std::to_string(entry.id));
  if (const PreMotionEntry* near = lookup(entry.target, entry.mode, kDuplicate * 1.0000001);
      near && (near->target - entry.target).norm() <= kDuplicate)
    throw std::invalid_argument("library already holds a target within 1e-6 m of entry " +
                                std::to_string(entry.id));

  const auto pos = std::lower_bound(entries_.begin(), entries_.end(), entry.id,
                                    [](const PreMotionEntry& e, std::int64_t id) { return e.id < id; });
  const bool append = pos == entries_.end();
  entries_.insert(pos, std::move(entry));
  if (append) {
    const PreMotionEntry& e = entries_.back();
    grid_[key(e.target, e.mode)].push_back(entries_.size() - 1);
    return;
  }
  grid_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i)
    grid_[key(entries_[i].target, entries_[i].mode)].push_back(i);
}

const PreMotionEntry* PreMotionLibrary::lookup(const Eigen::Vector3d& p, JumpMode mode,
                                               double r) const {
  if (!p.allFinite() || !(r > 0.0)) return nullptr;
  const Key c = key(p, mode);
  const auto reach = static_cast<std::int64_t>(std::ceil(r / cell_));
  const PreMotionEntry* best = nullptr;
  double best_d = r;
  for (std::int64_t i = c.i - reach; i <= c.i + reach; ++i)
    for (std::int64_t j = c.j - reach; j <= c.j + reach; ++j)
      for (std::int64_t k = c.k - reach; k <= c.k + reach; ++k) {
        const auto it = grid_.find(Key{c.mode, i, j, k});
        if (it == grid_.end()) continue;
        for (std::size_t idx : it->second) {
          const PreMotionEntry& e = entries_[idx];
          const double d = (e.target - p).norm();
          if (d < best_d || (best && d == best_d && e.id < best->id)) {
            best = &e;
            best_d = d;
          }
        }
      }
  return best;
}

const PreMotionEntry* PreMotionLibrary::lookup_scan(const Eigen::Vector3d& p, JumpMode mode,
                                                    double r) const {
  const PreMotionEntry* best = nullptr;
  double best_d = r;
  for (const auto& e : entries_) {
    if (e.mode != mode) continue;
    const double d = (e.target - p).norm();
    if (d < best_d) {
      best = &e;
      best_d = d;
    }
  }
  return best;
}

std::string PreMotionLibrary::record_text() const {
  std::string out;
  char buf[64];
  for (const auto& e : entries_) {
    std::snprintf(buf, sizeof buf, "%08lld %d", static_cast<long long>(e.id), static_cast<int>(e.mode));
    out += buf;
    append_number(out, e.fitness);
    std::snprintf(buf, sizeof buf, " %6d", e.generations);
    out += buf;
    for (int d = 0; d < 3; ++d) append_number(out, e.target[d]);
    append_number(out, e.yaw);
    out += e.obstacle ? " 1" : " 0";
    for (std::size_t i = 0; i < 12; ++i) append_number(out, e.obstacle ? (*e.obstacle)[i] : 0.0);
    std::snprintf(buf, sizeof buf, " %2zu", e.s_pre.v.size());
    out += buf;
    for (double v : e.s_pre.v) append_number(out, v);
    out += '\n';
  }
  return out;
}

std::string PreMotionLibrary::index_text() const {
  const std::string records = record_text();
  std::string out;
  out += "# omnijump pre-motion library index\n";
  out += "# premotion.dat holds one entry per line with fields:\n";
  out += "#   id mode fitness generations x y z yaw has_obstacle obstacle[12] dim s[dim]\n";
  out += "# mode: 0 omni, 1 agile, 2 humanoid; obstacle: above box then below box, centre xyz, half-extents xyz\n";
  out += "format 1\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "entries %zu\n", entries_.size());
  out += buf;
  std::snprintf(buf, sizeof buf, "checksum fnv1a64 %016llx\n",
                static_cast<unsigned long long>(fnv1a64(records)));
  out += buf;
  out += "# id x y z yaw mode\n";
  for (const auto& e : entries_) {
    std::snprintf(buf, sizeof buf, "%08lld %+.17e %+.17e %+.17e %+.17e %s\n",
                  static_cast<long long>(e.id), e.target.x(), e.target.y(), e.target.z(), e.yaw,
                  mode_name(e.mode));
    out += buf;
  }
  return out;
}

void PreMotionLibrary::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_file(dir / kRecordFile, record_text());
  write_file(dir / kIndexFile, index_text());
}

PreMotionLibrary PreMotionLibrary::load(const std::filesystem::path& dir) {
  const std::string index = read_file(dir / kIndexFile);
  const std::string records = read_file(dir / kRecordFile);

  struct IndexRow {
    std::int64_t id;
    Eigen::Vector3d p;
    double yaw;
    JumpMode mode;
    std::size_t line;
  };
  std::vector<IndexRow> rows;
  std::size_t expected = 0;
  std::uint64_t checksum = 0;
  bool have_format = false, have_entries = false, have_checksum = false;
  const auto ilines = lines_of(index);
  for (std::size_t n = 0; n < ilines.size(); ++n) {
    const std::size_t ln = n + 1;
    const auto tok = split(ilines[n]);
    if (tok.empty() || tok[0][0] == '#') continue;
    auto fail = [&](const std::string& what) { throw LibraryError(kIndexFile, ln, what); };
    if (tok[0] == "format") {
      if (tok.size() != 2 || tok[1] != "1") fail("unsupported format");
      have_format = true;
    } else if (tok[0] == "entries") {
      if (tok.size() != 2 || !parse_int(tok[1], expected)) fail("malformed entry count");
      have_entries = true;
    } else if (tok[0] == "checksum") {
      if (tok.size() != 3 || tok[1] != "fnv1a64") fail("malformed checksum line");
      const auto r = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), checksum, 16);
      if (r.ec != std::errc() || r.ptr != tok[2].data() + tok[2].size()) fail("malformed checksum");
      have_checksum = true;
    } else {
      IndexRow row{};
      row.line = ln;
      if (tok.size() != 6 || !parse_int(tok[0], row.id) || !parse_double(tok[1], row.p.x()) ||
          !parse_double(tok[2], row.p.y()) || !parse_double(tok[3], row.p.z()) ||
          !parse_double(tok[4], row.yaw))
        fail("malformed entry line");
      try {
        row.mode = parse_mode(tok[5]);
      } catch (const std::exception&) {
        fail("unknown mode '" + tok[5] + "'");
      }
      rows.push_back(row);
    }
  }
  if (!have_format || !have_entries || !have_checksum)
    throw LibraryError(kIndexFile, 0, "missing format, entries or checksum header");
  if (rows.size() != expected)
    throw LibraryError(kIndexFile, ilines.size(),
                       "header lists " + std::to_string(expected) + " entries but " +
                           std::to_string(rows.size()) + " are present");

  PreMotionLibrary lib;
  const auto rlines = lines_of(records);
  if (!records.empty() && records.back() != '\n')
    throw LibraryError(kRecordFile, rlines.size(),
                       "record " + std::to_string(rlines.size()) + " is truncated (no line end)");
  for (std::size_t n = 0; n < rlines.size(); ++n) {
    const std::size_t ln = n + 1;
    const auto tok = split(rlines[n]);
    auto fail = [&](const std::string& what) {
      throw LibraryError(kRecordFile, ln, "record " + std::to_string(ln) + ": " + what);
    };
    if (tok.size() < 22) fail("truncated record (" + std::to_string(tok.size()) + " fields)");
    PreMotionEntry e;
    int mode = 0;
    if (!parse_int(tok[0], e.id)) fail("bad id");
    if (!parse_int(tok[1], mode) || mode < 0 || mode > 2) fail("bad mode");
    e.mode = static_cast<JumpMode>(mode);
    if (!parse_double(tok[2], e.fitness)) fail("bad fitness");
    if (!parse_int(tok[3], e.generations)) fail("bad generation count");
    for (int d = 0; d < 3; ++d)
      if (!parse_double(tok[4 + static_cast<std::size_t>(d)], e.target[d])) fail("bad target");
    if (!parse_double(tok[7], e.yaw)) fail("bad yaw");
    int has_obstacle = 0;
    if (!parse_int(tok[8], has_obstacle) || has_obstacle < 0 || has_obstacle > 1) fail("bad obstacle flag");
    ObstacleRecord obs{};
    for (std::size_t i = 0; i < 12; ++i)
      if (!parse_double(tok[9 + i], obs[i])) fail("bad obstacle field");
    if (has_obstacle) e.obstacle = obs;
    std::size_t dim = 0;
    if (!parse_int(tok[21], dim) || dim != OptVector::dimension(e.mode)) fail("bad vector dimension");
    if (tok.size() != 22 + dim)
      fail("truncated record (" + std::to_string(tok.size()) + " of " + std::to_string(22 + dim) +
           " fields)");
    e.s_pre.mode = e.mode;
    e.s_pre.v.resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
      if (!parse_double(tok[22 + i], e.s_pre.v[i])) fail("bad vector component");

    if (n >= rows.size()) fail("record not listed in the index");
    const IndexRow& row = rows[n];
    if (row.id != e.id || row.mode != e.mode || row.p != e.target || row.yaw != e.yaw)
      throw LibraryError(kIndexFile, row.line,
                         "index entry disagrees with record " + std::to_string(ln));
    try {
      lib.add(std::move(e));
    } catch (const std::invalid_argument& err) {
      fail(err.what());
    }
  }
  if (rlines.size() < rows.size()) {
    const IndexRow& row = rows[rlines.size()];
    throw LibraryError(kRecordFile, rlines.size() + 1,
                       "record for id " + std::to_string(row.id) + " (index line " +
                           std::to_string(row.line) + ") is missing: file truncated");
  }
  if (fnv1a64(records) != checksum)
    throw LibraryError(kRecordFile, 0, "checksum mismatch");
  return lib;
}

std::vector<GridTarget> grid_targets(const std::vector<TargetBox>& boxes, double step,
                                     const std::vector<JumpMode>& modes) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("grid step must be positive");
  std::vector<GridTarget> out;
  std::int64_t id = 0;
  for (JumpMode m : modes)
    for (const TargetBox& box : boxes) {
      std::array<std::int64_t, 3> count{};
      bool empty = false;
      for (int d = 0; d < 3; ++d) {
        const double span = box.upper[d] - box.lower[d];
        if (!(span >= -1e-12)) empty = true;
        else count[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(std::floor(std::max(0.0, span) / step + 1e-9)) + 1;
      }
      if (empty) continue;
      for (std::int64_t i = 0; i < count[0]; ++i)
        for (std::int64_t j = 0; j < count[1]; ++j)
          for (std::int64_t k = 0; k < count[2]; ++k) {
            Eigen::Vector3d p = box.lower + step * Eigen::Vector3d(static_cast<double>(i),
                                                                   static_cast<double>(j),
                                                                   static_cast<double>(k));
            // Snap to the step lattice so that 0.3 + 3 * 0.05 prints as 0.45.
            for (int d = 0; d < 3; ++d) p[d] = std::round(p[d] * 1e9) / 1e9;
            out.push_back(GridTarget{id++, m, p});
          }
    }
  return out;
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  return s;
}

std::string failures_text(const std::vector<BuildFailure>& f) {
  std::string out = "# id mode x y z reason\n";
  char buf[160];
  for (const auto& e : f) {
    std::snprintf(buf, sizeof buf, "%08lld %s %+.17e %+.17e %+.17e ", static_cast<long long>(e.id),
                  mode_name(e.mode), e.p.x(), e.p.y(), e.p.z());
    out += buf;
    out += sanitize(e.reason);
    out += '\n';
  }
  return out;
}

std::vector<BuildFailure> load_failures(const std::filesystem::path& p) {
  std::vector<BuildFailure> out;
  if (!std::filesystem::exists(p)) return out;
  const auto lines = lines_of(read_file(p));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto tok = split(lines[n]);
    if (tok.empty() || tok[0][0] == '#') continue;
    BuildFailure f;
    if (tok.size() < 5 || !parse_int(tok[0], f.id) || !parse_double(tok[2], f.p.x()) ||
        !parse_double(tok[3], f.p.y()) || !parse_double(tok[4], f.p.z()))
      throw LibraryError(kFailureFile, n + 1, "malformed failure line");
    f.mode = parse_mode(tok[1]);
    const std::size_t at = lines[n].find(tok[4]) + tok[4].size();
    f.reason = at < lines[n].size() ? lines[n].substr(at + 1) : "";
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

BuildReport build_library(PreMotionLibrary& library, const RobotParams& params,
                          const BuildOptions& options,
                          const std::optional<std::filesystem::path>& dir,
                          const std::function<void(const std::string&)>& log) {
  options.config.validate();
  if (options.workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (options.stride < 1) throw std::invalid_argument("stride must be at least 1");

  BuildReport report;
  if (dir && std::filesystem::exists(*dir / kIndexFile)) library = PreMotionLibrary::load(*dir);
  if (dir) report.failures = load_failures(*dir / kFailureFile);

  const auto all = grid_targets(options.boxes, options.step, options.modes);
  std::vector<GridTarget> todo;
  for (std::size_t i = 0; i < all.size(); i += options.stride) {
    const GridTarget& t = all[i];
    const bool failed = std::any_of(report.failures.begin(), report.failures.end(),
                                    [&](const BuildFailure& f) { return f.id == t.id; });
    if (library.contains_id(t.id) || failed) {
      ++report.skipped;
      continue;
    }
    todo.push_back(t);
  }

  struct Outcome {
    std::optional<PreMotionEntry> entry;
    BuildFailure failure;
  };
  const std::size_t batch = static_cast<std::size_t>(options.workers) * 4;
  for (std::size_t start = 0; start < todo.size(); start += batch) {
    const std::size_t end = std::min(todo.size(), start + batch);
    std::vector<Outcome> results(end - start);
    parallel_for(static_cast<int>(end - start), options.workers, [&](int i) {
      const GridTarget& t = todo[start + static_cast<std::size_t>(i)];
      Outcome& o = results[static_cast<std::size_t>(i)];
      o.failure = BuildFailure{t.id, t.mode, t.p, ""};
      try {
        ProblemOptions po = options.problem;
        po.mode = t.mode;
        JumpTarget jt;
        jt.p = t.p;
        const JumpProblem problem(params, jt, po);
        DEConfig cfg = options.config;
        cfg.workers = 1;
        cfg.seed = derive_seed(options.config.seed, static_cast<std::uint64_t>(t.id), 0);
        const OptimizeResult r = optimize(problem, cfg);
        if (r.feasible && r.evaluation.fitness < cfg.epsilon) {
          PreMotionEntry e;
          e.id = t.id;
          e.target = t.p;
          e.mode = t.mode;
          e.s_pre = r.best;
          e.fitness = r.evaluation.fitness;
          e.generations = r.generations;
          o.entry = std::move(e);
        } else {
          o.failure.reason = "infeasible after " + std::to_string(r.generations) + " generations";
        }
      } catch (const std::exception& e) {
        o.failure.reason = e.what();
      }
    });
    for (auto& o : results) {
      ++report.attempted;
      if (o.entry) {
        library.add(std::move(*o.entry));
        ++report.solved;
      } else {
        if (log) log("target " + std::to_string(o.failure.id) + " failed: " + o.failure.reason);
        report.failures.push_back(std::move(o.failure));
      }
    }
    if (dir) {
      std::sort(report.failures.begin(), report.failures.end(),
                [](const BuildFailure& a, const BuildFailure& b) { return a.id < b.id; });
      library.save(*dir);
      write_file(*dir / kFailureFile, failures_text(report.failures));
    }
    if (log) log("solved " + std::to_string(report.solved) + "/" + std::to_string(report.attempted));
  }
  std::sort(report.failures.begin(), report.failures.end(),
            [](const BuildFailure& a, const BuildFailure& b) { return a.id < b.id; });
  if (dir) {
    library.save(*dir);
    write_file(*dir / kFailureFile, failures_text(report.failures));
  }
  return report;
}

std::vector<std::int64_t> verify_library(const PreMotionLibrary& library, const RobotParams& params,
                                         const ProblemOptions& options, double epsilon) {
  std::vector<std::int64_t> bad;
  for (const auto& e : library.entries()) {
    try {
      ProblemOptions po = options;
      po.mode = e.mode;
      JumpTarget jt;
      jt.p = e.target;
      jt.yaw = e.yaw;
      const JumpProblem problem(params, jt, po);
      if (!(problem.evaluate(e.s_pre).fitness < epsilon)) bad.push_back(e.id);
    } catch (const std::exception&) {
      bad.push_back(e.id);
    }
  }
  return bad;
}

}  // namespace omnijump
