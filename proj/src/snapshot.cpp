#include "wavemech/snapshot.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

namespace wavemech {

namespace {

void put_f32(std::ostream& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  const std::array<char, 4> b{static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                              static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
  out.write(b.data(), 4);
}

float get_f32(const unsigned char* b) {
  const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                             (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_snapshot(std::ostream& out, const ComplexField& field, const std::string& field_name) {
  const GridSpec& g = field.grid();
  nlohmann::json header;
  header["dims"] = nlohmann::json::array();
  header["extents"] = nlohmann::json::array();
  for (const auto& a : g.axes) {
    header["dims"].push_back(a.points);
    header["extents"].push_back({a.min, a.max});
  }
  header["dt"] = g.dt;
  header["time_label"] = field.time_label();
  header["field_name"] = field_name;
  header["boundary"] = to_string(g.boundary);
  out << header.dump() << '\n';
  for (const auto& v : field.values()) {
    put_f32(out, static_cast<float>(v.real()));
    put_f32(out, static_cast<float>(v.imag()));
  }
  require(static_cast<bool>(out), ErrorKind::io, "failed writing snapshot");
}

void write_snapshot(const std::filesystem::path& path, const ComplexField& field, const std::string& field_name) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot open " + path.string());
  write_snapshot(out, field, field_name);
}

void write_snapshot(const std::filesystem::path& path, const RealField& field, const std::string& field_name) {
  std::vector<Complex> v(field.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = Complex(field[i], 0.0);
  write_snapshot(path, ComplexField(field.grid(), std::move(v), field.time_label(), field.mask()), field_name);
}

Snapshot read_snapshot(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::io, "snapshot has no header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, std::string("malformed snapshot header: ") + e.what());
  }
  GridSpec g;
  try {
    const auto& dims = header.at("dims");
    const auto& ext = header.at("extents");
    require(dims.size() == ext.size(), ErrorKind::io, "dims/extents length mismatch");
    for (std::size_t a = 0; a < dims.size(); ++a) {
      g.axes.push_back(AxisSpec{ext[a].at(0).get<double>(), ext[a].at(1).get<double>(), dims[a].get<int>()});
    }
    g.dt = header.at("dt").get<double>();
    if (header.contains("boundary")) g.boundary = boundary_from_string(header["boundary"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, std::string("incomplete snapshot header: ") + e.what());
  }
  g.validate();
  const double t = header.value("time_label", 0.0);
  const std::string name = header.value("field_name", std::string{});
  std::vector<unsigned char> bytes(g.size() * 8);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<std::size_t>(in.gcount()) == bytes.size(), ErrorKind::io, "truncated snapshot payload");
  std::vector<Complex> values(g.size());
  std::vector<std::uint8_t> mask;
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = Complex(get_f32(&bytes[8 * i]), get_f32(&bytes[8 * i + 4]));
    if (!is_finite(values[i])) {
      if (mask.empty()) mask.assign(values.size(), 0);
      mask[i] = 1;
    }
  }
  return Snapshot{ComplexField(g, std::move(values), t, std::move(mask)), name};
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  return read_snapshot(in);
}

void write_csv(std::ostream& out, const ComplexField& field) {
  const GridSpec& g = field.grid();
  static const char* names[] = {"x", "y", "z"};
  for (int a = 0; a < g.dims(); ++a) out << names[a] << ',';
  out << "re,im\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Vec3 p = g.position(i);
    for (int a = 0; a < g.dims(); ++a) out << format_double(p[a]) << ',';
    out << format_double(field[i].real()) << ',' << format_double(field[i].imag()) << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const ComplexField& field) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io, "cannot open " + path.string());
  write_csv(out, field);
}

}  // namespace wavemech
