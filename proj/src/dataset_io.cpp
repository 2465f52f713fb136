#include "orbit/dataset_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "orbit/rng.hpp"

namespace orbit {

namespace {

constexpr std::array<char, 4> kMagic{'O', 'R', 'B', 'D'};
constexpr std::uint32_t kVersion = 1;

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(int v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void matrix(const Eigen::MatrixXd& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }
  void header(TaskKind kind, std::size_t count) {
    buf_.insert(buf_.end(), kMagic.begin(), kMagic.end());
    u32(kVersion);
    u32(static_cast<std::uint32_t>(kind));
    u64(count);
  }
  void save(const std::filesystem::path& path) const {
    auto out = open_out(path, true);
    out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
  }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  Reader(const std::filesystem::path& path) : path_(path), buf_(slurp(path)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{buf_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{buf_[pos_++]} << (8 * i);
    return v;
  }
  int i32() { return static_cast<int>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  Eigen::MatrixXd matrix() {
    const auto rows = u32();
    const auto cols = u32();
    need(static_cast<std::size_t>(rows) * cols * 8);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64();
    }
    return m;
  }
  std::size_t header(TaskKind kind) {
    need(4);
    if (!std::equal(kMagic.begin(), kMagic.end(), buf_.begin())) {
      throw Error(ErrorCode::BadMagic, path_.string() + " is not an orbit dataset payload");
    }
    pos_ = 4;
    if (u32() != kVersion) throw Error(ErrorCode::BadMagic, path_.string() + ": unknown version");
    if (u32() != static_cast<std::uint32_t>(kind)) {
      throw Error(ErrorCode::BadMagic, path_.string() + " holds a different task kind");
    }
    return static_cast<std::size_t>(u64());
  }
  void finish() const {
    if (pos_ != buf_.size()) {
      throw Error(ErrorCode::CountMismatch, path_.string() + " has trailing bytes");
    }
  }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) {
      throw Error(ErrorCode::CountMismatch, path_.string() + " is truncated");
    }
  }
  std::filesystem::path path_;
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Multiclass: return "multiclass";
    case TaskKind::Alignment: return "alignment";
    case TaskKind::Vowel: return "vowel";
    case TaskKind::Gmm: return "gmm";
  }
  return "unknown";
}

TaskKind task_kind_from_string(std::string_view name) {
  for (TaskKind k : {TaskKind::Multiclass, TaskKind::Alignment, TaskKind::Vowel, TaskKind::Gmm}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown task kind '" + std::string(name) + "'");
}

std::string format_double(double v) { return fmt::format("{}", v); }

std::string file_hash(const std::filesystem::path& path) {
  const auto b = slurp(path);
  return fmt::format("{:016x}", fnv1a64(b.data(), b.size()));
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path, false);
  out << j.dump(2) << '\n';
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines) {
  auto out = open_out(path, false);
  for (const auto& l : lines) out << l.dump() << '\n';
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
  }
  return out;
}

void write_multiclass_csv(const std::filesystem::path& path, const Dataset<MulticlassTask>& data) {
  auto out = open_out(path, false);
  fmt::memory_buffer buf;
  for (const auto& ex : data) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{}", ex.target);
    for (Eigen::Index j = 0; j < ex.input.size(); ++j) {
      fmt::format_to(std::back_inserter(buf), ",{}", ex.input[j]);
    }
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Dataset<MulticlassTask> read_multiclass_csv(const std::filesystem::path& path, int input_dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  Dataset<MulticlassTask> data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> fields;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(p, comma, v);
      if (ec != std::errc() || ptr != comma) {
        throw Error(ErrorCode::InvalidConfig,
                    fmt::format("{}:{}: malformed number", path.string(), line_no));
      }
      fields.push_back(v);
      p = comma + 1;
    }
    if (static_cast<int>(fields.size()) != input_dim + 1) {
      throw Error(ErrorCode::DimMismatch, fmt::format("{}:{}: {} features, expected {}",
                                                      path.string(), line_no, fields.size() - 1,
                                                      input_dim));
    }
    const int label = static_cast<int>(fields[0]);
    if (static_cast<double>(label) != fields[0]) {
      throw Error(ErrorCode::InvalidConfig,
                  fmt::format("{}:{}: label is not an integer", path.string(), line_no));
    }
    data.push_back({Eigen::Map<const Vector>(fields.data() + 1, input_dim), label});
  }
  return data;
}

void write_alignment_bin(const std::filesystem::path& path, const Dataset<AlignmentTask>& data) {
  Writer w;
  w.header(TaskKind::Alignment, data.size());
  for (const auto& ex : data) {
    w.matrix(ex.input.frames);
    w.i32(ex.input.num_phonemes);
    for (int v : ex.target) w.i32(v);
  }
  w.save(path);
}

Dataset<AlignmentTask> read_alignment_bin(const std::filesystem::path& path) {
  Reader r(path);
  const std::size_t n = r.header(TaskKind::Alignment);
  Dataset<AlignmentTask> data;
  for (std::size_t i = 0; i < n; ++i) {
    AlignmentInput x;
    x.frames = r.matrix();
    x.num_phonemes = r.i32();
    if (x.num_phonemes < 1 || x.num_phonemes > x.frames.rows()) {
      throw Error(ErrorCode::CountMismatch, path.string() + ": invalid phoneme count");
    }
    std::vector<int> y(static_cast<std::size_t>(x.num_phonemes));
    for (int& v : y) v = r.i32();
    data.push_back({std::move(x), std::move(y)});
  }
  r.finish();
  return data;
}

void write_vowel_bin(const std::filesystem::path& path, const Dataset<VowelTask>& data) {
  Writer w;
  w.header(TaskKind::Vowel, data.size());
  for (const auto& ex : data) {
    w.matrix(ex.input);
    w.i32(ex.target.onset);
    w.i32(ex.target.offset);
  }
  w.save(path);
}

Dataset<VowelTask> read_vowel_bin(const std::filesystem::path& path) {
  Reader r(path);
  const std::size_t n = r.header(TaskKind::Vowel);
  Dataset<VowelTask> data;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::MatrixXd x = r.matrix();
    VowelSpan y;
    y.onset = r.i32();
    y.offset = r.i32();
    data.push_back({std::move(x), y});
  }
  r.finish();
  return data;
}

void write_utterances_bin(const std::filesystem::path& path, const std::vector<Utterance>& data) {
  Writer w;
  w.header(TaskKind::Gmm, data.size());
  for (const auto& u : data) {
    w.matrix(u.frames);
    for (int s : u.states) w.i32(s);
  }
  w.save(path);
}

std::vector<Utterance> read_utterances_bin(const std::filesystem::path& path) {
  Reader r(path);
  const std::size_t n = r.header(TaskKind::Gmm);
  std::vector<Utterance> data;
  for (std::size_t i = 0; i < n; ++i) {
    Utterance u;
    u.frames = r.matrix();
    u.states.resize(static_cast<std::size_t>(u.frames.rows()));
    for (int& s : u.states) s = r.i32();
    data.push_back(std::move(u));
  }
  r.finish();
  return data;
}

nlohmann::json binary_layout_json(TaskKind kind) {
  nlohmann::json j = {
      {"byte_order", "little-endian"},
      {"header", "magic 'ORBD', u32 version, u32 task kind, u64 example count"},
      {"matrix", "u32 rows, u32 cols, rows*cols f64 row-major"}};
  switch (kind) {
    case TaskKind::Alignment:
      j["example"] = "matrix frames, i32 K, K x i32 start frames (1-based)";
      break;
    case TaskKind::Vowel: j["example"] = "matrix frames (T x 22), i32 onset, i32 offset (1-based)"; break;
    case TaskKind::Gmm: j["example"] = "matrix frames (T x p), T x i32 states"; break;
    case TaskKind::Multiclass: j = {{"format", "csv rows: label,x_1,...,x_p"}}; break;
  }
  return j;
}

}  // namespace orbit
