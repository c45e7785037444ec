#include "ihom/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace ihom {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

void export_density(const DensityField& f, const std::string& path, DensityFormat fmt) {
  if (fmt == DensityFormat::raw) {
    std::vector<float> buf(f.v.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = float(f.v[i]);
    auto out = open_out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(buf.data()),
              std::streamsize(buf.size() * sizeof(float)));
    return;
  }
  auto out = open_out(path);
  out << "<?xml version=\"1.0\"?>\n"
      << "<VTKFile type=\"ImageData\" version=\"1.0\" byte_order=\"LittleEndian\">\n"
      << "  <ImageData WholeExtent=\"0 " << f.n[0] << " 0 " << f.n[1] << " 0 " << f.n[2]
      << "\" Origin=\"0 0 0\" Spacing=\"" << 1.0 / f.n[0] << " " << 1.0 / f.n[1] << " "
      << 1.0 / f.n[2] << "\">\n"
      << "    <Piece Extent=\"0 " << f.n[0] << " 0 " << f.n[1] << " 0 " << f.n[2] << "\">\n"
      << "      <CellData Scalars=\"density\">\n"
      << "        <DataArray type=\"Float32\" Name=\"density\" format=\"ascii\">\n";
  char buf[32];
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.7g", f.v[i]);
    out << buf << ((i + 1) % 8 == 0 ? "\n" : " ");
  }
  out << "\n        </DataArray>\n"
      << "      </CellData>\n"
      << "    </Piece>\n"
      << "  </ImageData>\n"
      << "</VTKFile>\n";
}

void write_density_meta(const DensityField& f, const std::string& path, double volume,
                        std::uint64_t seed) {
  nlohmann::json j;
  j["resolution"] = {f.n[0], f.n[1], f.n[2]};
  j["volume_fraction"] = volume;
  j["seed"] = seed;
  j["dtype"] = "float32";
  j["order"] = "x-fastest";
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

DensityField import_density_raw(const std::string& path, IVec3 reso) {
  DensityField f(reso);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open density file: " + path);
  std::vector<float> buf(f.v.size());
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
  if (std::size_t(in.gcount()) != buf.size() * sizeof(float))
    throw std::runtime_error("density file too short: " + path);
  for (std::size_t i = 0; i < buf.size(); ++i) f.v[i] = double(buf[i]);
  return f;
}

void export_tensor(const Matrix6& c, const std::string& path) {
  auto out = open_out(path);
  char buf[48];
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", c(i, j));
      out << buf << (j == 5 ? "\n" : " ");
    }
  }
}

Matrix6 import_tensor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tensor file: " + path);
  Matrix6 c;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (!(in >> c(i, j))) throw std::runtime_error("malformed tensor file: " + path);
  return c;
}

}  // namespace ihom
