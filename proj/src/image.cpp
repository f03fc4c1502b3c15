#include "mloc/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mloc/error.hpp"

namespace mloc {

namespace {

int next_token(std::istream& is) {
    // Skips whitespace and '#' comments between PPM header fields.
    while (true) {
        const int c = is.peek();
        if (c == '#') {
            std::string line;
            std::getline(is, line);
        } else if (std::isspace(c)) {
            is.get();
        } else {
            break;
        }
    }
    int v = -1;
    is >> v;
    return v;
}

}  // namespace

Tensor read_ppm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("image: cannot open " + path);
    std::string magic;
    is >> magic;
    if (magic != "P6") throw Error("image: " + path + " is not a binary PPM (P6)");
    const int w = next_token(is);
    const int h = next_token(is);
    const int maxval = next_token(is);
    if (w <= 0 || h <= 0 || maxval != 255) {
        throw Error("image: malformed PPM header in " + path);
    }
    is.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * 3);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!is) throw Error("image: truncated pixel data in " + path);
    Tensor out({3, static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
    for (std::size_t y = 0; y < static_cast<std::size_t>(h); ++y) {
        for (std::size_t x = 0; x < static_cast<std::size_t>(w); ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                out.at3(c, y, x) = raw[(y * w + x) * 3 + c] / 255.0;
            }
        }
    }
    return out;
}

void write_ppm(const Tensor& image, const std::string& path) {
    if (image.shape.size() != 3 || image.shape[0] != 3) {
        throw Error("image: write_ppm expects a (3,H,W) tensor, got " + shape_str(image.shape));
    }
    const std::size_t h = image.shape[1], w = image.shape[2];
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("image: cannot write " + path);
    os << "P6\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> raw(h * w * 3);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = std::clamp(image.at3(c, y, x), 0.0, 1.0);
                raw[(y * w + x) * 3 + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
        }
    }
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!os) throw Error("image: write failed for " + path);
}

Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w) {
    if (image.shape.size() != 3) {
        throw Error("image: resize expects a (C,H,W) tensor, got " + shape_str(image.shape));
    }
    const std::size_t channels = image.shape[0], h = image.shape[1], w = image.shape[2];
    if (out_h == h && out_w == w) return image;
    if (out_h == 0 || out_w == 0) throw Error("image: target size must be positive");
    Tensor out({channels, out_h, out_w});
    const double sy = static_cast<double>(h) / static_cast<double>(out_h);
    const double sx = static_cast<double>(w) / static_cast<double>(out_w);
    for (std::size_t y = 0; y < out_h; ++y) {
        const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0,
                                     static_cast<double>(h - 1));
        const std::size_t y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, h - 1);
        const double ty = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0,
                                         static_cast<double>(w - 1));
            const std::size_t x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const double tx = fx - static_cast<double>(x0);
            for (std::size_t c = 0; c < channels; ++c) {
                const double top =
                    (1.0 - tx) * image.at3(c, y0, x0) + tx * image.at3(c, y0, x1);
                const double bot =
                    (1.0 - tx) * image.at3(c, y1, x0) + tx * image.at3(c, y1, x1);
                out.at3(c, y, x) = (1.0 - ty) * top + ty * bot;
            }
        }
    }
    return out;
}

Tensor load_image(const std::string& path, std::size_t target_size) {
    return resize_bilinear(read_ppm(path), target_size, target_size);
}

}  // namespace mloc
