#pragma once

#include <string>

#include "mloc/tensor.hpp"

namespace mloc {

// Binary PPM (P6, 8-bit) is the mandatory image format; values scale to
// [0,1] on load. Tensors are (3,H,W).
Tensor read_ppm(const std::string& path);
void write_ppm(const Tensor& image, const std::string& path);

// Bilinear resize with half-pixel centers; equal sizes pass through exactly.
Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w);

// read_ppm + resize_bilinear.
Tensor load_image(const std::string& path, std::size_t target_size);

}  // namespace mloc
