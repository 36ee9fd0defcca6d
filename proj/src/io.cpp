#include "slicedot/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace slicedot::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, std::size_t row, const std::string& name) {
  const std::string t = trim(tok);
  double v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    fail(ErrorCode::Parse, name + ": row " + std::to_string(row) + ": cannot parse '" + t + "' as a number", row);
  if (!std::isfinite(v)) fail(ErrorCode::NonFinite, name + ": row " + std::to_string(row) + ": non-finite value", row);
  return v;
}

}  // namespace

std::vector<double> parse_row(const std::string& line, std::size_t row, const std::string& name,
                              std::optional<double>* weight) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string tok;
  std::vector<std::string> toks;
  while (std::getline(ss, tok, ',')) toks.push_back(tok);
  if (!line.empty() && line.back() == ',') toks.emplace_back();
  *weight = std::nullopt;
  for (std::size_t k = 0; k < toks.size(); ++k) {
    const std::string t = trim(toks[k]);
    if (t.rfind("w:", 0) == 0) {
      if (k + 1 != toks.size())
        fail(ErrorCode::Parse, name + ": row " + std::to_string(row) + ": weight marker must be the last column", row);
      *weight = parse_double(t.substr(2), row, name);
    } else {
      vals.push_back(parse_double(t, row, name));
    }
  }
  if (vals.empty()) fail(ErrorCode::Parse, name + ": row " + std::to_string(row) + ": no coordinates", row);
  return vals;
}

Measure read_points_csv(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> pts;
  std::vector<double> weights;
  std::optional<bool> weighted;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::optional<double> w;
    auto vals = parse_row(t, row, name, &w);
    if (!weighted) weighted = w.has_value();
    if (*weighted != w.has_value())
      fail(ErrorCode::Parse, name + ": row " + std::to_string(row) + ": weight column used on some rows only", row);
    if (!pts.empty() && vals.size() != pts.front().size())
      fail(ErrorCode::Parse,
           name + ": row " + std::to_string(row) + ": expected " + std::to_string(pts.front().size()) +
               " coordinates, found " + std::to_string(vals.size()),
           row);
    if (w && *w < 0)
      fail(ErrorCode::NegativeWeight, name + ": row " + std::to_string(row) + ": negative weight", row);
    pts.push_back(std::move(vals));
    if (w) weights.push_back(*w);
  }
  if (pts.empty()) fail(ErrorCode::EmptyInput, name + ": no points");
  if (weighted && *weighted) return new_measure<double>(pts, weights);
  return new_measure<double>(pts);
}

Measure read_points_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Parse, "cannot open " + path);
  return read_points_csv(in, path);
}

void write_points_csv(std::ostream& out, const Eigen::MatrixXd& points, const Eigen::VectorXd* weights) {
  char buf[64];
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index k = 0; k < points.cols(); ++k) {
      const auto res = std::to_chars(buf, buf + sizeof buf, points(i, k));
      if (k) out << ',';
      out.write(buf, res.ptr - buf);
    }
    if (weights) {
      const auto res = std::to_chars(buf, buf + sizeof buf, (*weights)(i));
      out << ",w:";
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

namespace {
void write_entries(std::ostream& out, const std::vector<PlanEntry<double>>& entries) {
  char buf[64];
  out << "i,j,mass\n";
  for (const auto& e : entries) {
    const auto res = std::to_chars(buf, buf + sizeof buf, e.mass);
    out << e.i << ',' << e.j << ',';
    out.write(buf, res.ptr - buf);
    out << '\n';
  }
}
}  // namespace

void write_plan_csv(std::ostream& out, const Plan1D<double>& plan) { write_entries(out, plan.entries); }
void write_plan_csv(std::ostream& out, const PlanD& plan) { write_entries(out, plan.entries); }

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string ppm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int ppm_int(std::istream& in, const char* what) {
  const std::string t = ppm_token(in);
  int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || v <= 0)
    fail(ErrorCode::Parse, std::string("bad PPM ") + what);
  return v;
}

}  // namespace

Image read_ppm(std::istream& in) {
  if (ppm_token(in) != "P6") fail(ErrorCode::Parse, "not a binary PPM (P6) image");
  Image img;
  img.width = ppm_int(in, "width");
  img.height = ppm_int(in, "height");
  if (ppm_int(in, "maxval") != 255) fail(ErrorCode::Parse, "PPM maxval must be 255");
  const std::size_t bytes = 3ull * static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.rgb.resize(bytes);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) fail(ErrorCode::Parse, "truncated PPM pixel data");
  return img;
}

Image read_ppm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Parse, "cannot open " + path);
  return read_ppm(in);
}

void write_ppm(std::ostream& out, const Image& img) {
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

void write_ppm_file(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Parse, "cannot write " + path);
  write_ppm(out, img);
}

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) fail(ErrorCode::Parse, "truncated sketch bank");
  char buf[sizeof(T)];
  std::memcpy(buf, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

std::string serialize_bank(const SketchBank& bank) {
  std::string out = "SKB1";
  put<std::uint64_t>(out, bank.ds_hash());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(bank.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(bank.sketches().size()));
  for (const auto& s : bank.sketches()) out += s.serialize();
  return out;
}

SketchBank deserialize_bank(const std::string& bytes) {
  if (bytes.compare(0, 4, "SKB1") != 0) fail(ErrorCode::Parse, "bad sketch bank magic");
  std::size_t pos = 4;
  const auto hash = get<std::uint64_t>(bytes, pos);
  const auto d = get<std::uint32_t>(bytes, pos);
  const auto L = get<std::uint32_t>(bytes, pos);
  std::vector<KllSketch> sketches;
  for (std::uint32_t l = 0; l < L; ++l) sketches.push_back(KllSketch::deserialize(bytes, &pos));
  if (pos != bytes.size()) fail(ErrorCode::Parse, "trailing bytes after sketch bank");
  return SketchBank(hash, static_cast<Index>(d), std::move(sketches));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Parse, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Parse, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace slicedot::io
