#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hydrocal/error.hpp"

namespace hydrocal {

/// Row-major 2D grid. Row 0 is the northern edge.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int nrows, int ncols, T fill = T{})
      : nrows_(nrows), ncols_(ncols), data_(static_cast<size_t>(nrows) * ncols, fill) {
    if (nrows <= 0 || ncols <= 0) fail(ErrorCode::InvalidArgument, "grid dimensions must be positive");
  }

  int nrows() const { return nrows_; }
  int ncols() const { return ncols_; }
  size_t size() const { return data_.size(); }
  bool same_shape(const Grid& o) const { return nrows_ == o.nrows_ && ncols_ == o.ncols_; }

  T& operator()(int r, int c) { return data_[static_cast<size_t>(r) * ncols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<size_t>(r) * ncols_ + c]; }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  bool in_bounds(int r, int c) const { return r >= 0 && r < nrows_ && c >= 0 && c < ncols_; }
  size_t index(int r, int c) const { return static_cast<size_t>(r) * ncols_ + c; }
  int row_of(size_t i) const { return static_cast<int>(i) / ncols_; }
  int col_of(size_t i) const { return static_cast<int>(i) % ncols_; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  void fill(T v) { data_.assign(data_.size(), v); }

 private:
  int nrows_ = 0;
  int ncols_ = 0;
  std::vector<T> data_;
};

/// Plain-text grid raster: header lines `ncols`, `nrows`, `cellsize_km`,
/// `nodata_value`, then row-major whitespace-separated values.
struct TextRaster {
  double cellsize_km = 1.0;
  double nodata_value = -9999.0;
  Grid<double> values;
};

TextRaster read_text_raster(const std::string& path);
void write_text_raster(const std::string& path, const TextRaster& raster);

TextRaster parse_text_raster(std::istream& in, const std::string& origin);
void serialize_text_raster(std::ostream& out, const TextRaster& raster);

}  // namespace hydrocal
