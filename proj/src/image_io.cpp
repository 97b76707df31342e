#include "absim/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "absim/errors.hpp"

namespace absim {

namespace {

constexpr char kF32Magic[8] = {'A', 'B', 'S', 'I', 'M', 'F', '3', '2'};

void put_u32le(std::ofstream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
        static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool host_is_little_endian() {
    const std::uint32_t probe = 1;
    unsigned char b;
    std::memcpy(&b, &probe, 1);
    return b == 1;
}

}  // namespace

void write_f32_grid(const std::filesystem::path& path, const F32Grid& grid) {
    if (grid.data.size() != static_cast<std::size_t>(grid.width) * grid.height) {
        throw ConfigError("f32 grid dims do not match data size");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kF32Magic, sizeof(kF32Magic));
    put_u32le(out, grid.width);
    put_u32le(out, grid.height);
    if (host_is_little_endian()) {
        out.write(reinterpret_cast<const char*>(grid.data.data()),
                  static_cast<std::streamsize>(grid.data.size() * sizeof(float)));
    } else {
        for (float v : grid.data) {
            unsigned char bytes[4];
            std::memcpy(bytes, &v, 4);
            std::swap(bytes[0], bytes[3]);
            std::swap(bytes[1], bytes[2]);
            out.write(reinterpret_cast<const char*>(bytes), 4);
        }
    }
    if (!out) throw IoError("short write to " + path.string());
}

F32Grid read_f32_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    char magic[8];
    if (!in.read(magic, 8)) throw IoError(path.string() + ": truncated header", 0);
    if (std::memcmp(magic, kF32Magic, 8) != 0) {
        throw IoError(path.string() + ": bad magic (expected ABSIMF32)", 0);
    }
    unsigned char dims[8];
    if (!in.read(reinterpret_cast<char*>(dims), 8)) {
        throw IoError(path.string() + ": truncated dimensions", 8);
    }
    F32Grid grid;
    grid.width = get_u32le(dims);
    grid.height = get_u32le(dims + 4);
    const std::size_t count = static_cast<std::size_t>(grid.width) * grid.height;
    if (count == 0 || count > (1u << 28)) {
        throw IoError(path.string() + ": implausible dimensions", 8);
    }
    grid.data.resize(count);
    if (!in.read(reinterpret_cast<char*>(grid.data.data()),
                 static_cast<std::streamsize>(count * sizeof(float)))) {
        throw IoError(path.string() + ": truncated pixel data",
                      16 + static_cast<long long>(in.gcount()));
    }
    if (!host_is_little_endian()) {
        for (float& v : grid.data) {
            unsigned char bytes[4];
            std::memcpy(bytes, &v, 4);
            std::swap(bytes[0], bytes[3]);
            std::swap(bytes[1], bytes[2]);
            std::memcpy(&v, bytes, 4);
        }
    }
    return grid;
}

GrayImage load_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path.string());

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8) {
        throw IoError(path.string() + ": file shorter than a PNG signature", 0);
    }
    if (png_sig_cmp(sig, 0, 8) != 0) {
        throw IoError(path.string() + ": not a PNG file", 0);
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng init failed");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<unsigned char> raw;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path.string() + ": corrupt PNG stream");
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (color_type != PNG_COLOR_TYPE_GRAY) {
        const int channels = png_get_channels(png, info);
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path.string() + ": expected single-channel grayscale, got " +
                      std::to_string(channels) + " channel(s) of color type " +
                      std::to_string(color_type));
    }
    if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (bit_depth == 16 && host_is_little_endian()) png_set_swap(png);  // disk is big-endian

    png_read_update_info(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    raw.resize(row_bytes * height);
    row_ptrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = raw.data() + y * row_bytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    GrayImage img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.bit_depth = bit_depth == 16 ? 16 : 8;
    img.pixels.resize(static_cast<std::size_t>(width) * height);
    if (img.bit_depth == 16) {
        const auto* p = reinterpret_cast<const std::uint16_t*>(raw.data());
        for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = p[i] / 65535.0;
    } else {
        for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = raw[i] / 255.0;
    }
    return img;
}

void save_png(const GrayImage& image, const std::filesystem::path& path) {
    if (image.width < 1 || image.height < 1) throw ConfigError("empty image");
    if (image.bit_depth != 8 && image.bit_depth != 16) {
        throw ConfigError("PNG bit depth must be 8 or 16");
    }

    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("cannot open " + path.string() + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path.string() + ": PNG write failed");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, image.width, image.height, image.bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    if (image.bit_depth == 16) {
        if (host_is_little_endian()) png_set_swap(png);  // rows below are host-order
        std::vector<std::uint16_t> row(image.width);
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                const double v = std::clamp(image.at(y, x), 0.0, 1.0);
                row[x] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
            }
            png_write_row(png, reinterpret_cast<png_bytep>(row.data()));
        }
    } else {
        std::vector<unsigned char> row(image.width);
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                const double v = std::clamp(image.at(y, x), 0.0, 1.0);
                row[x] = static_cast<unsigned char>(std::lround(v * 255.0));
            }
            png_write_row(png, row.data());
        }
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

GrayImage load_image(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".png" || ext == ".PNG") return load_png(path);
    if (ext == ".f32") {
        const F32Grid grid = read_f32_grid(path);
        GrayImage img;
        img.width = static_cast<int>(grid.width);
        img.height = static_cast<int>(grid.height);
        img.bit_depth = 16;
        img.pixels.resize(grid.data.size());
        for (std::size_t i = 0; i < grid.data.size(); ++i) img.pixels[i] = grid.data[i];
        return img;
    }
    throw IoError(path.string() + ": unsupported format (expected .png or .f32)");
}

void save_image(const GrayImage& image, const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".png" || ext == ".PNG") {
        save_png(image, path);
        return;
    }
    if (ext == ".f32") {
        F32Grid grid;
        grid.width = static_cast<std::uint32_t>(image.width);
        grid.height = static_cast<std::uint32_t>(image.height);
        grid.data.resize(image.pixels.size());
        for (std::size_t i = 0; i < image.pixels.size(); ++i) {
            grid.data[i] = static_cast<float>(image.pixels[i]);
        }
        write_f32_grid(path, grid);
        return;
    }
    throw IoError(path.string() + ": unsupported format (expected .png or .f32)");
}

void save_psf_preview_png(const PsfImage& psf, const std::filesystem::path& path) {
    double peak = 0.0;
    for (double v : psf.data) peak = std::max(peak, v);
    GrayImage img;
    img.width = psf.grid;
    img.height = psf.grid;
    img.bit_depth = 16;
    img.pixels.resize(psf.data.size());
    const double scale = peak > 0.0 ? 1.0 / peak : 0.0;
    for (std::size_t i = 0; i < psf.data.size(); ++i) img.pixels[i] = psf.data[i] * scale;
    save_png(img, path);
}

void save_psf(const PsfImage& psf, const std::filesystem::path& prefix, bool png_preview) {
    F32Grid grid;
    grid.width = static_cast<std::uint32_t>(psf.grid);
    grid.height = static_cast<std::uint32_t>(psf.grid);
    grid.data.resize(psf.data.size());
    for (std::size_t i = 0; i < psf.data.size(); ++i) {
        grid.data[i] = static_cast<float>(psf.data[i]);
    }
    std::filesystem::path f32_path = prefix;
    f32_path += ".f32";
    write_f32_grid(f32_path, grid);

    nlohmann::ordered_json sidecar;
    sidecar["optics"] = {{"na", psf.config.na},
                         {"lambda_um", psf.config.lambda_um},
                         {"n_immersion", psf.config.n_immersion},
                         {"n_med", psf.config.n_med},
                         {"pixel_um", psf.config.pixel_um},
                         {"grid", psf.config.grid},
                         {"immersion_phase", psf.config.immersion_phase}};
    nlohmann::ordered_json coeffs = nlohmann::ordered_json::object();
    for (const auto& [index, amplitude] : psf.coeffs.entries) {
        coeffs[std::to_string(index)] = amplitude;
    }
    sidecar["coefficients"] = coeffs;
    sidecar["undersampled"] = psf.undersampled;

    std::filesystem::path json_path = prefix;
    json_path += ".json";
    std::ofstream out(json_path);
    if (!out) throw IoError("cannot open " + json_path.string() + " for writing");
    out << sidecar.dump(2) << "\n";

    if (png_preview) {
        std::filesystem::path png_path = prefix;
        png_path += ".png";
        save_psf_preview_png(psf, png_path);
    }
}

}  // namespace absim
