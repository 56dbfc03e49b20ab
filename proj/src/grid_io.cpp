#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hydrocal/grid.hpp"

namespace hydrocal {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TextRaster parse_text_raster(std::istream& in, const std::string& origin) {
  long ncols = -1, nrows = -1;
  TextRaster raster;
  std::string key;
  for (int i = 0; i < 4; ++i) {
    if (!(in >> key)) fail(ErrorCode::ParseError, origin + ": truncated raster header");
    double value;
    if (!(in >> value)) fail(ErrorCode::ParseError, origin + ": bad header value for '" + key + "'");
    if (key == "ncols") ncols = static_cast<long>(value);
    else if (key == "nrows") nrows = static_cast<long>(value);
    else if (key == "cellsize_km") raster.cellsize_km = value;
    else if (key == "nodata_value") raster.nodata_value = value;
    else fail(ErrorCode::ParseError, origin + ": unknown header key '" + key + "'");
  }
  if (ncols <= 0 || nrows <= 0)
    fail(ErrorCode::ParseError, origin + ": raster dimensions must be positive");
  raster.values = Grid<double>(static_cast<int>(nrows), static_cast<int>(ncols));
  for (size_t i = 0; i < raster.values.size(); ++i) {
    if (!(in >> raster.values[i]))
      fail(ErrorCode::ParseError, origin + ": truncated raster body at value " + std::to_string(i));
  }
  return raster;
}

void serialize_text_raster(std::ostream& out, const TextRaster& raster) {
  out << "ncols " << raster.values.ncols() << "\n";
  out << "nrows " << raster.values.nrows() << "\n";
  out << "cellsize_km " << format_double(raster.cellsize_km) << "\n";
  out << "nodata_value " << format_double(raster.nodata_value) << "\n";
  for (int r = 0; r < raster.values.nrows(); ++r) {
    for (int c = 0; c < raster.values.ncols(); ++c) {
      if (c) out << ' ';
      out << format_double(raster.values(r, c));
    }
    out << '\n';
  }
}

TextRaster read_text_raster(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open raster file: " + path);
  return parse_text_raster(in, path);
}

void write_text_raster(const std::string& path, const TextRaster& raster) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write raster file: " + path);
  serialize_text_raster(out, raster);
}

}  // namespace hydrocal
