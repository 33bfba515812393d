#pragma once

// On-disk formats: binary PGM/PPM, the FSPK bit-packed pattern pack, and the
// line-oriented plan, measurement and manifest text files.
//
// All numbers are written with std::to_chars (shortest round-trip, no locale)
// and all binary integers are little-endian unless the format says otherwise.

#include <algorithm>
#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "fsi/grid.hpp"
#include "fsi/sampling.hpp"
#include "fsi/sensor.hpp"

namespace fsi::io {

namespace detail {

using fsi::detail::require;

inline std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  require(static_cast<bool>(os), ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  return os;
}

inline std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  require(static_cast<bool>(is), ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  return is;
}

inline void finish(std::ostream& os, const std::string& what) {
  os.flush();
  require(static_cast<bool>(os), ErrorKind::io, "write failed: " + what);
}

}  // namespace detail

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  detail::require(ec == std::errc{}, ErrorKind::format, "cannot format number");
  return std::string(buf.data(), end);
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  detail::require(ec == std::errc{} && ptr == last && !text.empty(), ErrorKind::format,
                  "malformed " + std::string(what) + ": '" + std::string(text) + "'");
  return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// ---------------------------------------------------------------------------
// PGM / PPM
// ---------------------------------------------------------------------------

/// Integer-valued grayscale image as stored in a binary PGM.
struct PgmImage {
  Grid<std::uint16_t> pixels;
  int maxval = 255;
  friend bool operator==(const PgmImage&, const PgmImage&) = default;
};

inline void write_pgm(std::ostream& os, const PgmImage& img) {
  detail::require(img.maxval == 255 || img.maxval == 65535, ErrorKind::invalid_argument,
                  "PGM maxval must be 255 or 65535");
  for (auto p : img.pixels.values())
    detail::require(p <= img.maxval, ErrorKind::invalid_argument, "PGM pixel exceeds maxval");
  os << "P5\n" << img.pixels.width() << ' ' << img.pixels.height() << '\n' << img.maxval << '\n';
  std::vector<char> payload;
  payload.reserve(img.pixels.size() * (img.maxval > 255 ? 2 : 1));
  for (auto p : img.pixels.values()) {
    if (img.maxval > 255) payload.push_back(static_cast<char>(p >> 8));  // PGM samples are big-endian
    payload.push_back(static_cast<char>(p & 0xFF));
  }
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

namespace detail {

// Next header token of a PNM file, skipping whitespace and '#' comments.
inline std::string pnm_token(std::istream& is) {
  std::string tok;
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (std::isspace(c)) {
      c = is.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c) && c != '#') {
    tok.push_back(static_cast<char>(c));
    c = is.get();
  }
  require(!tok.empty(), ErrorKind::format, "PNM header is truncated");
  // `c` was the single whitespace after the token; it is consumed.
  require(c != '#', ErrorKind::format, "comment directly after PNM header token");
  return tok;
}

}  // namespace detail

inline PgmImage read_pgm(std::istream& is) {
  const auto magic = detail::pnm_token(is);
  detail::require(magic == "P5", ErrorKind::format, "not a binary PGM (magic '" + magic + "')");
  const int w = parse_number<int>(detail::pnm_token(is), "PGM width");
  const int h = parse_number<int>(detail::pnm_token(is), "PGM height");
  const int maxval = parse_number<int>(detail::pnm_token(is), "PGM maxval");
  detail::require(w > 0 && h > 0, ErrorKind::format, "PGM dimensions must be positive");
  detail::require(maxval >= 1 && maxval <= 65535, ErrorKind::format,
                  "unsupported PGM maxval " + std::to_string(maxval));

  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> payload(static_cast<std::size_t>(w) * h * bytes_per);
  is.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  detail::require(static_cast<std::size_t>(is.gcount()) == payload.size(), ErrorKind::format,
                  "PGM payload is truncated");

  PgmImage img{Grid<std::uint16_t>(w, h), maxval};
  auto px = img.pixels.values();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = bytes_per == 2 ? static_cast<std::uint16_t>((payload[2 * i] << 8) | payload[2 * i + 1]) : payload[i];
    detail::require(px[i] <= maxval, ErrorKind::format, "PGM sample exceeds maxval");
  }
  return img;
}

inline void write_pgm(const std::filesystem::path& path, const PgmImage& img) {
  auto os = detail::open_out(path, true);
  write_pgm(os, img);
  detail::finish(os, path.string());
}

inline PgmImage read_pgm(const std::filesystem::path& path) {
  auto is = detail::open_in(path, true);
  return read_pgm(is);
}

/// Sample values divided by maxval.
inline Grid<double> to_unit(const PgmImage& img) {
  Grid<double> out(img.pixels.width(), img.pixels.height());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values()[i] = static_cast<double>(img.pixels.values()[i]) / img.maxval;
  return out;
}

/// Affine map [low, high] -> [0, maxval] used when exporting real-valued images.
struct ExportScaling {
  double low = 0.0;
  double high = 1.0;
  int maxval = 255;

  static ExportScaling fit(const Grid<double>& g, int maxval) {
    ExportScaling s{0.0, 0.0, maxval};
    if (g.empty()) return s;
    const auto [lo, hi] = std::minmax_element(g.values().begin(), g.values().end());
    s.low = *lo;
    s.high = *hi;
    return s;
  }

  std::uint16_t encode(double x) const {
    if (!(high > low)) return 0;
    const double t = std::clamp((x - low) / (high - low), 0.0, 1.0);
    return static_cast<std::uint16_t>(std::lround(t * maxval));
  }

  double decode(std::uint16_t q) const {
    if (!(high > low)) return low;
    return low + (high - low) * static_cast<double>(q) / maxval;
  }
};

inline PgmImage export_image(const Grid<double>& g, const ExportScaling& s) {
  PgmImage img{Grid<std::uint16_t>(g.width(), g.height()), s.maxval};
  for (std::size_t i = 0; i < g.size(); ++i) img.pixels.values()[i] = s.encode(g.values()[i]);
  return img;
}

/// Binary PPM (P6, maxval 255) from three equally sized channels already in [0, 255].
inline void write_ppm(const std::filesystem::path& path, const Grid<std::uint16_t>& r, const Grid<std::uint16_t>& g,
                      const Grid<std::uint16_t>& b) {
  detail::require(r.same_shape(g) && r.same_shape(b), ErrorKind::dimension_mismatch, "PPM channels differ in size");
  auto os = detail::open_out(path, true);
  os << "P6\n" << r.width() << ' ' << r.height() << "\n255\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    const char px[3] = {static_cast<char>(std::min<int>(r.values()[i], 255)),
                        static_cast<char>(std::min<int>(g.values()[i], 255)),
                        static_cast<char>(std::min<int>(b.values()[i], 255))};
    os.write(px, 3);
  }
  detail::finish(os, path.string());
}

// ---------------------------------------------------------------------------
// FSPK pattern pack
//
//   offset  size  field
//   0       4     magic "FSPK"
//   4       2     version (u16 LE) = 1
//   6       4     width (u32 LE)
//   10      4     height (u32 LE)
//   14      4     pattern count (u32 LE)
//   18      ...   patterns in order; each row packed MSB-first, zero-padded
//                 to a whole byte: ceil(width / 8) * height bytes per pattern
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 4> pack_magic = {'F', 'S', 'P', 'K'};
inline constexpr std::uint16_t pack_version = 1;
inline constexpr std::size_t pack_header_size = 18;

struct PatternPackHeader {
  std::uint16_t version = pack_version;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t count = 0;

  std::size_t row_bytes() const noexcept { return (static_cast<std::size_t>(width) + 7) / 8; }
  std::size_t pattern_bytes() const noexcept { return row_bytes() * height; }
  std::size_t file_size() const noexcept { return pack_header_size + pattern_bytes() * count; }
};

namespace detail {

template <class T>
void put_le(std::vector<unsigned char>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

template <class T>
T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v = static_cast<T>(v | (static_cast<T>(p[i]) << (8 * i)));
  return v;
}

}  // namespace detail

/// Row-wise MSB-first bit packing of one pattern.
inline std::vector<unsigned char> pack_bits(const BinaryPattern& p) {
  const std::size_t row_bytes = (static_cast<std::size_t>(p.width()) + 7) / 8;
  std::vector<unsigned char> out(row_bytes * p.height(), 0);
  for (int y = 0; y < p.height(); ++y) {
    unsigned char* row = out.data() + row_bytes * y;
    for (int x = 0; x < p.width(); ++x)
      if (p(x, y)) row[x / 8] |= static_cast<unsigned char>(0x80u >> (x % 8));
  }
  return out;
}

inline BinaryPattern unpack_bits(const unsigned char* data, int width, int height) {
  const std::size_t row_bytes = (static_cast<std::size_t>(width) + 7) / 8;
  BinaryPattern p(width, height);
  for (int y = 0; y < height; ++y) {
    const unsigned char* row = data + row_bytes * y;
    for (int x = 0; x < width; ++x) p(x, y) = (row[x / 8] >> (7 - x % 8)) & 1u;
  }
  return p;
}

/// Streams patterns into a pack whose count is declared up front.
class PatternPackWriter {
 public:
  PatternPackWriter(std::ostream& os, int width, int height, std::uint32_t count) : os_(&os) {
    detail::require(width > 0 && height > 0, ErrorKind::invalid_argument, "pattern pack dimensions must be positive");
    header_ = {pack_version, static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height), count};
    std::vector<unsigned char> bytes(pack_magic.begin(), pack_magic.end());
    detail::put_le(bytes, header_.version);
    detail::put_le(bytes, header_.width);
    detail::put_le(bytes, header_.height);
    detail::put_le(bytes, header_.count);
    os_->write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }

  void append(const BinaryPattern& p) {
    detail::require(static_cast<std::uint32_t>(p.width()) == header_.width &&
                        static_cast<std::uint32_t>(p.height()) == header_.height,
                    ErrorKind::dimension_mismatch, "pattern size differs from the pack's");
    detail::require(written_ < header_.count, ErrorKind::consistency, "more patterns than declared in the pack");
    const auto bytes = pack_bits(p);
    os_->write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    ++written_;
  }

  void close() {
    detail::require(written_ == header_.count, ErrorKind::consistency, "fewer patterns than declared in the pack");
    detail::finish(*os_, "pattern pack");
  }

  const PatternPackHeader& header() const noexcept { return header_; }

 private:
  std::ostream* os_;
  PatternPackHeader header_;
  std::uint32_t written_ = 0;
};

/// Writes all patterns; an empty list needs explicit dimensions.
inline void write_pattern_pack(std::ostream& os, std::span<const BinaryPattern> patterns, int width = 0,
                               int height = 0) {
  if (!patterns.empty()) {
    width = patterns.front().width();
    height = patterns.front().height();
  }
  PatternPackWriter w(os, width, height, static_cast<std::uint32_t>(patterns.size()));
  for (const auto& p : patterns) w.append(p);
  w.close();
}

inline void write_pattern_pack(const std::filesystem::path& path, std::span<const BinaryPattern> patterns,
                               int width = 0, int height = 0) {
  auto os = detail::open_out(path, true);
  write_pattern_pack(os, patterns, width, height);
}

class PatternPackReader {
 public:
  explicit PatternPackReader(std::istream& is) : is_(&is) {
    std::array<unsigned char, pack_header_size> h{};
    is_->read(reinterpret_cast<char*>(h.data()), h.size());
    detail::require(static_cast<std::size_t>(is_->gcount()) == h.size(), ErrorKind::format,
                    "pattern pack header is truncated");
    detail::require(std::equal(pack_magic.begin(), pack_magic.end(), h.begin()), ErrorKind::format,
                    "bad pattern pack magic");
    header_.version = detail::get_le<std::uint16_t>(h.data() + 4);
    header_.width = detail::get_le<std::uint32_t>(h.data() + 6);
    header_.height = detail::get_le<std::uint32_t>(h.data() + 10);
    header_.count = detail::get_le<std::uint32_t>(h.data() + 14);
    detail::require(header_.version == pack_version, ErrorKind::format,
                    "unsupported pattern pack version " + std::to_string(header_.version));
    detail::require(header_.width > 0 && header_.height > 0, ErrorKind::format,
                    "pattern pack dimensions must be positive");
    buffer_.resize(header_.pattern_bytes());
  }

  const PatternPackHeader& header() const noexcept { return header_; }
  bool done() const noexcept { return read_ == header_.count; }

  BinaryPattern next() {
    detail::require(!done(), ErrorKind::consistency, "no patterns left in the pack");
    is_->read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
    detail::require(static_cast<std::size_t>(is_->gcount()) == buffer_.size(), ErrorKind::format,
                    "pattern pack length mismatch: payload ends inside pattern " + std::to_string(read_));
    ++read_;
    return unpack_bits(buffer_.data(), static_cast<int>(header_.width), static_cast<int>(header_.height));
  }

  /// Fails unless the stream ends exactly after the declared patterns.
  void expect_end() {
    detail::require(is_->peek() == std::char_traits<char>::eof(), ErrorKind::format,
                    "pattern pack length mismatch: trailing bytes after the declared patterns");
  }

 private:
  std::istream* is_;
  PatternPackHeader header_;
  std::vector<unsigned char> buffer_;
  std::uint32_t read_ = 0;
};

inline std::vector<BinaryPattern> read_pattern_pack(std::istream& is) {
  PatternPackReader r(is);
  std::vector<BinaryPattern> out;
  out.reserve(r.header().count);
  while (!r.done()) out.push_back(r.next());
  r.expect_end();
  return out;
}

inline std::vector<BinaryPattern> read_pattern_pack(const std::filesystem::path& path) {
  auto is = detail::open_in(path, true);
  return read_pattern_pack(is);
}

// ---------------------------------------------------------------------------
// Plan file
//
//   fsi-plan 1
//   n <int>
//   strategy <full|spiral>
//   coefficients <int>          (0 for full)
//   schedule <three-step|four-step>
//   rate <number>
//   mean <number>
//   contrast <number>
//   upsample <int>
//   mode <bicubic|analytic>
//   kind <binary|grayscale>
//   scan <raster|serpentine>
//   steps <count>
//   <index> <u> <v> <phase>     one line per step
// ---------------------------------------------------------------------------

inline void write_plan(std::ostream& os, const SamplingPlan& plan) {
  os << "fsi-plan 1\n"
     << "n " << plan.image_size << '\n'
     << "strategy " << to_string(plan.strategy.kind) << '\n'
     << "coefficients " << plan.strategy.coefficients << '\n'
     << "schedule " << to_string(plan.schedule) << '\n'
     << "rate " << format_number(plan.rate) << '\n'
     << "mean " << format_number(plan.pattern.mean) << '\n'
     << "contrast " << format_number(plan.pattern.contrast) << '\n'
     << "upsample " << plan.pattern.upsample << '\n'
     << "mode " << to_string(plan.pattern.mode) << '\n'
     << "kind " << to_string(plan.pattern.kind) << '\n'
     << "scan " << to_string(plan.pattern.scan) << '\n'
     << "steps " << plan.steps.size() << '\n';
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    os << i << ' ' << s.frequency.u << ' ' << s.frequency.v << ' ' << format_number(s.phase) << '\n';
  }
}

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(&is) {}

  std::optional<std::string> next() {
    std::string line;
    if (!std::getline(*is_, line)) return std::nullopt;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  std::string expect(std::string_view what) {
    auto line = next();
    require(line.has_value(), ErrorKind::format, "unexpected end of file, expected " + std::string(what));
    return *line;
  }

  // "key value" line with a fixed key.
  std::string field(std::string_view key) {
    const auto line = expect(key);
    const auto tokens = split_ws(line);
    require(tokens.size() == 2 && tokens[0] == key, ErrorKind::format,
            "line " + std::to_string(number_) + ": expected '" + std::string(key) + " <value>'");
    return std::string(tokens[1]);
  }

  std::size_t line_number() const noexcept { return number_; }

 private:
  std::istream* is_;
  std::size_t number_ = 0;
};

}  // namespace detail

inline SamplingPlan read_plan(std::istream& is) {
  detail::LineReader in(is);
  detail::require(in.expect("plan header") == "fsi-plan 1", ErrorKind::format, "not an fsi-plan version 1 file");
  SamplingPlan plan;
  plan.image_size = parse_number<int>(in.field("n"), "n");
  plan.strategy.kind = parse_strategy_kind(in.field("strategy"));
  plan.strategy.coefficients = parse_number<std::size_t>(in.field("coefficients"), "coefficients");
  plan.schedule = parse_phase_schedule(in.field("schedule"));
  plan.rate = parse_number<double>(in.field("rate"), "rate");
  plan.pattern.mean = parse_number<double>(in.field("mean"), "mean");
  plan.pattern.contrast = parse_number<double>(in.field("contrast"), "contrast");
  plan.pattern.upsample = parse_number<int>(in.field("upsample"), "upsample");
  plan.pattern.mode = parse_upsample_mode(in.field("mode"));
  plan.pattern.kind = parse_pattern_kind(in.field("kind"));
  plan.pattern.scan = parse_scan_order(in.field("scan"));
  const auto count = parse_number<std::size_t>(in.field("steps"), "steps");

  plan.steps.reserve(count);
  while (auto line = in.next()) {
    if (line->empty()) continue;
    const auto t = split_ws(*line);
    detail::require(t.size() == 4, ErrorKind::format,
                    "line " + std::to_string(in.line_number()) + ": expected '<index> <u> <v> <phase>'");
    const auto index = parse_number<std::size_t>(t[0], "step index");
    detail::require(index == plan.steps.size(), ErrorKind::format,
                    "line " + std::to_string(in.line_number()) + ": step index out of sequence");
    plan.steps.push_back({{parse_number<int>(t[1], "u"), parse_number<int>(t[2], "v")},
                          parse_number<double>(t[3], "phase")});
  }
  detail::require(plan.steps.size() == count, ErrorKind::format,
                  "plan declares " + std::to_string(count) + " steps but lists " + std::to_string(plan.steps.size()));
  detail::require(count % plan.phases_per_frequency() == 0, ErrorKind::format,
                  "plan step count is not a multiple of the phase schedule");
  return plan;
}

inline void write_plan(const std::filesystem::path& path, const SamplingPlan& plan) {
  auto os = detail::open_out(path, false);
  write_plan(os, plan);
  detail::finish(os, path.string());
}

inline SamplingPlan read_plan(const std::filesystem::path& path) {
  auto is = detail::open_in(path, false);
  return read_plan(is);
}

// ---------------------------------------------------------------------------
// Measurement file
//
//   # fsi-measurements version=1 records=<count>
//   <step_index>,<u>,<v>,<phase>,<value>      one line per record
// ---------------------------------------------------------------------------

inline void write_measurements(std::ostream& os, std::span<const MeasurementRecord> records) {
  os << "# fsi-measurements version=1 records=" << records.size() << '\n';
  for (const auto& r : records) {
    os << r.step_index << ',' << r.frequency.u << ',' << r.frequency.v << ',' << format_number(r.phase) << ','
       << format_number(r.value) << '\n';
  }
}

inline std::vector<MeasurementRecord> read_measurements(std::istream& is) {
  detail::LineReader in(is);
  const auto header = in.expect("measurement header");
  constexpr std::string_view prefix = "# fsi-measurements version=1 records=";
  detail::require(header.starts_with(prefix), ErrorKind::format, "not an fsi-measurements version 1 file");
  const auto count = parse_number<std::size_t>(std::string_view(header).substr(prefix.size()), "record count");

  std::vector<MeasurementRecord> out;
  out.reserve(count);
  while (auto line = in.next()) {
    if (line->empty()) continue;
    const auto f = split(*line, ',');
    detail::require(f.size() == 5, ErrorKind::format,
                    "line " + std::to_string(in.line_number()) + ": expected 5 comma-separated fields");
    out.push_back({parse_number<std::size_t>(f[0], "step index"),
                   {parse_number<int>(f[1], "u"), parse_number<int>(f[2], "v")},
                   parse_number<double>(f[3], "phase"),
                   parse_number<double>(f[4], "value")});
  }
  detail::require(out.size() == count, ErrorKind::format,
                  "measurement header declares " + std::to_string(count) + " records but file has " +
                      std::to_string(out.size()));
  return out;
}

inline void write_measurements(const std::filesystem::path& path, std::span<const MeasurementRecord> records) {
  auto os = detail::open_out(path, false);
  write_measurements(os, records);
  detail::finish(os, path.string());
}

inline std::vector<MeasurementRecord> read_measurements(const std::filesystem::path& path) {
  auto is = detail::open_in(path, false);
  return read_measurements(is);
}

// ---------------------------------------------------------------------------
// Run manifest: ordered `key = value` lines (TOML subset; strings quoted) so a
// manifest can be fed back to the CLI as a config file.
// ---------------------------------------------------------------------------

class RunManifest {
 public:
  void set(std::string key, std::string_view text) { put(std::move(key), quote(text)); }
  void set(std::string key, const char* text) { set(std::move(key), std::string_view(text)); }
  void set(std::string key, double value) { put(std::move(key), format_number(value)); }
  void set(std::string key, bool value) { put(std::move(key), value ? "true" : "false"); }
  template <class T>
    requires std::is_integral_v<T>
  void set(std::string key, T value) {
    put(std::move(key), std::to_string(value));
  }

  std::optional<std::string> get(std::string_view key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return unquote(v);
    return std::nullopt;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
  }

  void write(const std::filesystem::path& path) const {
    auto os = detail::open_out(path, false);
    write(os);
    detail::finish(os, path.string());
  }

  static RunManifest read(std::istream& is) {
    RunManifest m;
    detail::LineReader in(is);
    while (auto line = in.next()) {
      if (line->empty() || line->front() == '#') continue;
      const auto eq = line->find(" = ");
      detail::require(eq != std::string::npos, ErrorKind::format,
                      "manifest line " + std::to_string(in.line_number()) + ": expected 'key = value'");
      m.entries_.emplace_back(line->substr(0, eq), line->substr(eq + 3));
    }
    return m;
  }

  static RunManifest read(const std::filesystem::path& path) {
    auto is = detail::open_in(path, false);
    return read(is);
  }

  friend bool operator==(const RunManifest&, const RunManifest&) = default;

 private:
  void put(std::string key, std::string literal) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = std::move(literal);
        return;
      }
    }
    entries_.emplace_back(std::move(key), std::move(literal));
  }

  static std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    out.push_back('"');
    return out;
  }

  static std::string unquote(const std::string& v) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"') return v;
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) ++i;
      out.push_back(v[i]);
    }
    return out;
  }

  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace fsi::io
