#include "msfct/io.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace msfct {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void atomic_write_bytes(const std::string& path, const void* bytes, size_t n) {
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + tmp);
    f.write(static_cast<const char*>(bytes), static_cast<std::streamsize>(n));
    if (!f) throw IoError("short write: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename " + tmp + " -> " + path + ": " + ec.message());
}

std::vector<char> read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw IoError("cannot open for reading: " + path);
  const std::streamsize n = f.tellg();
  f.seekg(0);
  std::vector<char> buf(static_cast<size_t>(n));
  if (n > 0) f.read(buf.data(), n);
  if (!f) throw IoError("short read: " + path);
  return buf;
}

// Raw little-endian float32 payload (host assumed little-endian).
void write_raw_f32(const std::string& path, const ArrayXd& data) {
  std::vector<float> f(static_cast<size_t>(data.size()));
  for (Index i = 0; i < data.size(); ++i) f[static_cast<size_t>(i)] = static_cast<float>(data[i]);
  atomic_write_bytes(path, f.data(), f.size() * sizeof(float));
}

ArrayXd read_raw_f32(const std::string& path, Index expected) {
  const auto bytes = read_bytes(path);
  if (bytes.size() != static_cast<size_t>(expected) * sizeof(float))
    throw IoError("size mismatch in " + path + ": expected " +
                  std::to_string(expected * static_cast<Index>(sizeof(float))) +
                  " bytes, got " + std::to_string(bytes.size()));
  ArrayXd out(expected);
  const float* f = reinterpret_cast<const float*>(bytes.data());
  for (Index i = 0; i < expected; ++i) out[i] = static_cast<double>(f[i]);
  return out;
}

json read_sidecar(const std::string& raw_path, const char* want_kind) {
  const std::string side = raw_path + ".json";
  json j;
  try {
    j = json::parse(read_text_file(side));
  } catch (const json::exception& e) {
    throw IoError("bad sidecar " + side + ": " + e.what());
  }
  if (j.value("dtype", "") != "float32")
    throw IoError(side + ": unsupported dtype (want float32)");
  if (j.value("kind", "") != want_kind)
    throw IoError(side + ": kind mismatch (want " + std::string(want_kind) + ")");
  return j;
}

void write_sidecar(const std::string& raw_path, const json& j) {
  write_text_file(raw_path + ".json", j.dump(2) + "\n");
}

void append_be32(std::string& s, uint32_t v) {
  s.push_back(static_cast<char>((v >> 24) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>(v & 0xff));
}

void append_chunk(std::string& out, const char type[4], const std::string& payload) {
  append_be32(out, static_cast<uint32_t>(payload.size()));
  const size_t start = out.size();
  out.append(type, 4);
  out += payload;
  const uLong crc =
      crc32(0L, reinterpret_cast<const Bytef*>(out.data() + start), static_cast<uInt>(out.size() - start));
  append_be32(out, static_cast<uint32_t>(crc));
}

}  // namespace

void write_text_file(const std::string& path, const std::string& contents) {
  atomic_write_bytes(path, contents.data(), contents.size());
}

std::string read_text_file(const std::string& path) {
  const auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_volume(const std::string& path, const VolumeD& vol) {
  vol.validate();
  json j;
  j["kind"] = "volume";
  j["dtype"] = "float32";
  j["ordering"] = "zyx";
  j["dims"] = {vol.nx, vol.ny, vol.nz};
  j["spacing_xy"] = vol.spacing_xy;
  j["spacing_z"] = vol.spacing_z;
  write_raw_f32(path, vol.data);
  write_sidecar(path, j);
}

VolumeD read_volume(const std::string& path) {
  const json j = read_sidecar(path, "volume");
  if (j.value("ordering", "") != "zyx")
    throw IoError(path + ".json: unsupported volume ordering");
  VolumeD v;
  try {
    v.nx = j.at("dims").at(0).get<Index>();
    v.ny = j.at("dims").at(1).get<Index>();
    v.nz = j.at("dims").at(2).get<Index>();
    v.spacing_xy = j.at("spacing_xy").get<double>();
    v.spacing_z = j.at("spacing_z").get<double>();
  } catch (const json::exception& e) {
    throw IoError(path + ".json: " + e.what());
  }
  if (v.nx < 1 || v.ny < 1 || v.nz < 1) throw IoError(path + ".json: bad dims");
  v.data = read_raw_f32(path, v.nx * v.ny * v.nz);
  v.validate();
  return v;
}

void write_sinogram(const std::string& path, const SinogramD& sino) {
  sino.validate();
  json j;
  j["kind"] = "sinogram";
  j["dtype"] = "float32";
  j["ordering"] = "svc";
  j["dims"] = {sino.n_views, sino.n_channels, sino.n_slices};
  j["channel_spacing"] = sino.channel_spacing;
  j["slice_spacing"] = sino.slice_spacing;
  j["angles"] = std::vector<double>(sino.angles.data(), sino.angles.data() + sino.angles.size());
  write_raw_f32(path, sino.data);
  write_sidecar(path, j);
}

SinogramD read_sinogram(const std::string& path) {
  const json j = read_sidecar(path, "sinogram");
  if (j.value("ordering", "") != "svc")
    throw IoError(path + ".json: unsupported sinogram ordering");
  SinogramD s;
  try {
    s.n_views = j.at("dims").at(0).get<Index>();
    s.n_channels = j.at("dims").at(1).get<Index>();
    s.n_slices = j.at("dims").at(2).get<Index>();
    s.channel_spacing = j.at("channel_spacing").get<double>();
    s.slice_spacing = j.at("slice_spacing").get<double>();
    const auto a = j.at("angles").get<std::vector<double>>();
    s.angles = Eigen::Map<const Eigen::ArrayXd>(a.data(), static_cast<Index>(a.size()));
  } catch (const json::exception& e) {
    throw IoError(path + ".json: " + e.what());
  }
  if (s.n_views < 1 || s.n_channels < 1 || s.n_slices < 1)
    throw IoError(path + ".json: bad dims");
  s.data = read_raw_f32(path, s.size());
  s.validate();
  return s;
}

void write_weights(const std::string& path, const WeightMapD& w) {
  w.validate();
  json j;
  j["kind"] = "weights";
  j["dtype"] = "float32";
  j["ordering"] = "svc";
  j["dims"] = {w.n_views, w.n_channels, w.n_slices};
  write_raw_f32(path, w.data.cast<double>());
  write_sidecar(path, j);
}

WeightMapD read_weights(const std::string& path) {
  const json j = read_sidecar(path, "weights");
  WeightMapD w;
  try {
    w.n_views = j.at("dims").at(0).get<Index>();
    w.n_channels = j.at("dims").at(1).get<Index>();
    w.n_slices = j.at("dims").at(2).get<Index>();
  } catch (const json::exception& e) {
    throw IoError(path + ".json: " + e.what());
  }
  w.data = read_raw_f32(path, w.size());
  w.validate();
  return w;
}

void write_residual_trace(const std::string& path, const ResidualTrace& trace) {
  std::string s = "iteration,primal,dual\n";
  for (size_t i = 0; i < trace.size(); ++i)
    s += std::to_string(i + 1) + "," + format_double(trace.primal[i]) + "," +
         format_double(trace.dual[i]) + "\n";
  write_text_file(path, s);
}

ResidualTrace read_residual_trace(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "iteration,primal,dual")
    throw IoError(path + ": missing residual trace header");
  ResidualTrace t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    long long it = 0;
    double p = 0, d = 0;
    if (std::sscanf(line.c_str(), "%lld,%lf,%lf", &it, &p, &d) != 3)
      throw IoError(path + ": bad trace row '" + line + "'");
    t.primal.push_back(p);
    t.dual.push_back(d);
  }
  return t;
}

void write_metrics_csv(const std::string& path, const MetricsReport& report) {
  std::string s = "method,status,nrmse,psnr_db,ssim\n";
  for (const auto& r : report.rows) {
    if (r.ok)
      s += r.method + ",ok," + format_double(r.nrmse) + "," + format_double(r.psnr_db) +
           "," + format_double(r.ssim) + "\n";
    else
      s += r.method + ",failed,,,\n";
  }
  write_text_file(path, s);
}

void write_metrics_json(const std::string& path, const MetricsReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["method"] = r.method;
    row["status"] = r.ok ? "ok" : "failed";
    if (r.ok) {
      row["nrmse"] = r.nrmse;
      row["psnr_db"] = r.psnr_db;
      row["ssim"] = r.ssim;
    }
    if (!r.message.empty()) row["message"] = r.message;
    rows.push_back(row);
  }
  write_text_file(path, json{{"methods", rows}}.dump(2) + "\n");
}

void write_tune_csv(const std::string& path, const TuneResult& result,
                    TuneMetric metric) {
  std::string s = "index,sigma_xy,sigma_yz,sigma_xz,status,";
  s += metric == TuneMetric::Psnr ? "psnr_db" : "nrmse";
  s += "\n";
  for (size_t i = 0; i < result.table.size(); ++i) {
    const auto& e = result.table[i];
    s += std::to_string(i) + "," + format_double(e.sigmas.xy) + "," +
         format_double(e.sigmas.yz) + "," + format_double(e.sigmas.xz) + ",";
    if (e.ok)
      s += "ok," + format_double(e.score) + "\n";
    else
      s += "failed,\n";
  }
  write_text_file(path, s);
}

void write_png16(const std::string& path, const MatrixX<double>& image, double window,
                 double level) {
  if (image.rows() < 1 || image.cols() < 1)
    throw IoError("write_png16: empty image");
  if (!(window > 0.0)) throw IoError("write_png16: window must be > 0");
  const Index h = image.rows(), w = image.cols();
  const double lo = level - window / 2.0;

  // filter byte 0 + big-endian 16-bit samples per scanline
  std::string raw;
  raw.reserve(static_cast<size_t>(h * (1 + 2 * w)));
  for (Index r = 0; r < h; ++r) {
    raw.push_back('\0');
    for (Index c = 0; c < w; ++c) {
      double t = (image(r, c) - lo) / window;
      t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
      const auto v = static_cast<uint16_t>(t * 65535.0 + 0.5);
      raw.push_back(static_cast<char>((v >> 8) & 0xff));
      raw.push_back(static_cast<char>(v & 0xff));
    }
  }

  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::string comp(comp_len, '\0');
  if (compress2(reinterpret_cast<Bytef*>(comp.data()), &comp_len,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                Z_DEFAULT_COMPRESSION) != Z_OK)
    throw IoError("write_png16: deflate failed");
  comp.resize(comp_len);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  append_be32(ihdr, static_cast<uint32_t>(w));
  append_be32(ihdr, static_cast<uint32_t>(h));
  ihdr.push_back(16);  // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // adaptive filtering
  ihdr.push_back(0);   // no interlace
  append_chunk(png, "IHDR", ihdr);
  append_chunk(png, "IDAT", comp);
  append_chunk(png, "IEND", "");
  atomic_write_bytes(path, png.data(), png.size());
}

std::vector<std::string> write_volume_pngs(const std::string& dir,
                                           const std::string& stem, const VolumeD& vol) {
  vol.validate();
  const double vmin = vol.data.minCoeff();
  const double vmax = vol.data.maxCoeff();
  const double window = vmax > vmin ? vmax - vmin : 1.0;
  const double level = (vmax + vmin) / 2.0;
  std::vector<std::string> paths;
  for (Index iz = 0; iz < vol.nz; ++iz) {
    char name[512];
    std::snprintf(name, sizeof(name), "%s_z%03lld.png", stem.c_str(),
                  static_cast<long long>(iz));
    const std::string path = (fs::path(dir) / name).string();
    write_png16(path, extract_slice(vol, Plane::XY, iz), window, level);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace msfct
