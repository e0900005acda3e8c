#include "bgk/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

namespace bgk {

namespace {

constexpr char kMagic[8] = {'B', 'G', 'K', 'S', 'N', 'A', 'P', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t k = 0; k < sizeof(T); ++k) bytes[k] = static_cast<char>((value >> (8 * k)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw ConfigError("snapshot " + path.string() + " is truncated");
  T value = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) value |= static_cast<T>(bytes[k]) << (8 * k);
  return value;
}

double get_f64(std::istream& in, const std::filesystem::path& path) {
  return std::bit_cast<double>(get_le<std::uint64_t>(in, path));
}

}  // namespace

SolverState<double> Snapshot::state() const {
  VelocityGrid<double> vel(space.dim(), velocity_points, half_width);
  return {KineticField<double>(space, vel, values), t, static_cast<long long>(steps)};
}

void write_snapshot(const std::filesystem::path& path, const SolverState<double>& s, double gamma) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeAbort("cannot open " + path.string() + " for writing");
  const auto& space = s.F.space;
  const auto& vel = s.F.velocity;
  out.write(kMagic, sizeof(kMagic));
  put_le(out, static_cast<std::uint32_t>(space.dim()));
  for (int a = 0; a < space.dim(); ++a) put_le(out, static_cast<std::uint32_t>(space.count(a)));
  put_le(out, static_cast<std::uint32_t>(vel.points_per_axis()));
  put_f64(out, gamma);
  put_f64(out, s.t);
  for (int a = 0; a < space.dim(); ++a) put_f64(out, space.length(a));
  put_f64(out, vel.half_width());
  put_le(out, static_cast<std::uint64_t>(s.steps));
  const auto& v = s.F.values;
  for (Index i = 0; i < v.rows(); ++i)
    for (Index j = 0; j < v.cols(); ++j) put_f64(out, v(i, j));
  if (!out) throw RuntimeAbort("failed writing snapshot " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open snapshot " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw ConfigError(path.string() + " is not a snapshot file (bad magic)");
  Snapshot snap;
  const auto d = get_le<std::uint32_t>(in, path);
  if (d == 0 || d > 3) throw ConfigError("snapshot " + path.string() + " has unsupported dimension");
  std::vector<int> counts(d);
  for (auto& c : counts) c = static_cast<int>(get_le<std::uint32_t>(in, path));
  snap.velocity_points = static_cast<int>(get_le<std::uint32_t>(in, path));
  snap.gamma = get_f64(in, path);
  snap.t = get_f64(in, path);
  std::vector<double> lengths(d);
  for (auto& l : lengths) l = get_f64(in, path);
  snap.half_width = get_f64(in, path);
  snap.steps = get_le<std::uint64_t>(in, path);
  snap.space = SpatialGrid<double>(counts, lengths);
  Index nodes = 1;
  for (std::uint32_t a = 0; a < d; ++a) nodes *= snap.velocity_points;
  snap.values.resize(snap.space.size(), nodes);
  for (Index i = 0; i < snap.values.rows(); ++i)
    for (Index j = 0; j < nodes; ++j) snap.values(i, j) = get_f64(in, path);
  if (in.peek() != std::char_traits<char>::eof())
    throw ConfigError("snapshot " + path.string() + " has trailing bytes");
  return snap;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw RuntimeAbort("cannot open " + path.string() + " for writing");
}

std::string CsvWriter::format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string CsvWriter::quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void CsvWriter::require_width(std::size_t n) {
  if (width_ == 0) width_ = n;
  if (n != width_) throw std::logic_error("CSV row width does not match the header of " + path_.string());
}

void CsvWriter::header(const std::vector<std::string>& names) {
  require_width(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) out_ << (k ? "," : "") << quote(names[k]);
  out_ << "\r\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  require_width(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format(values[k]);
  out_ << "\r\n";
  if (!out_) throw RuntimeAbort("failed writing " + path_.string());
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == name) return k;
  throw std::out_of_range("no CSV column named " + std::string(name));
}

namespace {

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad CSV number: " + s);
  return v;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_record(line);
    if (first) {
      t.columns = std::move(fields);
      first = false;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace bgk
