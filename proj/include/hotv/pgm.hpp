#pragma once

// Netpbm graymaps: P2 (ASCII) and P5 (binary) in, P5 out. Values are scaled
// to [0,1] by maxval. Masks are graymaps where white (> maxval/2) marks an
// observed pixel and black marks the hole.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace hotv {

struct Graymap {
    Extents extents;
    int maxval = 255;
    std::vector<int> samples;
};

namespace detail {

class PnmScanner {
public:
    explicit PnmScanner(const std::string& bytes) : b_(bytes) {}

    std::size_t offset() const noexcept { return pos_; }

    void skip_space_and_comments()
    {
        while (pos_ < b_.size()) {
            const auto c = static_cast<unsigned char>(b_[pos_]);
            if (c == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n' && b_[pos_] != '\r')
                    ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_uint(const char* what)
    {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long v = 0;
        while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
            v = v * 10 + (b_[pos_] - '0');
            if (v > 1L << 30)
                throw parse_error(std::string(what) + " out of range", start);
            ++pos_;
        }
        if (pos_ == start)
            throw parse_error(std::string("expected ") + what, start);
        return v;
    }

    /// The single whitespace byte that ends a binary header.
    void single_space()
    {
        if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_])))
            throw parse_error("expected whitespace before raster", pos_);
        ++pos_;
    }

    const std::string& bytes() const noexcept { return b_; }
    void advance(std::size_t n) noexcept { pos_ += n; }

private:
    const std::string& b_;
    std::size_t pos_ = 0;
};

inline std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace detail

inline Graymap parse_pgm(const std::string& bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw parse_error("unsupported magic (need P2 or P5)", 0);
    const bool binary = bytes[1] == '5';
    detail::PnmScanner s(bytes);
    s.advance(2);
    Graymap g;
    const long w = s.read_uint("width");
    const long h = s.read_uint("height");
    const long maxval = s.read_uint("maxval");
    if (w < 1 || h < 1)
        throw parse_error("image extents must be >= 1", s.offset());
    if (maxval < 1 || maxval > 65535)
        throw parse_error("maxval must lie in [1, 65535]", s.offset());
    g.extents = {static_cast<int>(w), static_cast<int>(h)};
    g.maxval = static_cast<int>(maxval);
    const std::size_t count = g.extents.count();
    g.samples.resize(count);

    if (binary) {
        s.single_space();
        const std::size_t bpp = maxval < 256 ? 1 : 2;
        if (bytes.size() - s.offset() < count * bpp)
            throw parse_error("raster truncated", bytes.size());
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + s.offset());
        for (std::size_t i = 0; i < count; ++i) {
            const int v = bpp == 1 ? p[i] : (p[2 * i] << 8) | p[2 * i + 1];
            if (v > maxval)
                throw parse_error("sample exceeds maxval", s.offset() + i * bpp);
            g.samples[i] = v;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            s.skip_space_and_comments();
            const std::size_t at = s.offset();
            const long v = s.read_uint("sample");
            if (v > maxval)
                throw parse_error("sample exceeds maxval", at);
            g.samples[i] = static_cast<int>(v);
        }
    }
    return g;
}

inline Graymap read_graymap(const std::string& path) { return parse_pgm(detail::slurp(path)); }

/// Grayscale image scaled to [0,1].
inline ScalarField read_pgm(const std::string& path, double h = 1.0)
{
    const Graymap g = read_graymap(path);
    ScalarField f(g.extents, h);
    for (std::size_t i = 0; i < g.samples.size(); ++i)
        f[i] = static_cast<double>(g.samples[i]) / g.maxval;
    return f;
}

/// P5 bytes of the field clamped to [0,1] and quantized to maxval.
inline std::string encode_pgm(const ScalarField& f, int maxval = 255)
{
    if (maxval < 1 || maxval > 65535)
        throw domain_error("maxval must lie in [1, 65535]");
    std::string out = "P5\n" + std::to_string(f.width()) + " " + std::to_string(f.height()) + "\n"
        + std::to_string(maxval) + "\n";
    const bool wide = maxval > 255;
    out.reserve(out.size() + f.size() * (wide ? 2 : 1));
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = std::isnan(f[i]) ? 0.0 : std::clamp(f[i], 0.0, 1.0);
        const auto q = static_cast<unsigned>(std::lround(v * maxval));
        if (wide)
            out.push_back(static_cast<char>(q >> 8));
        out.push_back(static_cast<char>(q & 0xff));
    }
    return out;
}

inline void write_pgm(const ScalarField& f, const std::string& path, int maxval = 255)
{
    const std::string bytes = encode_pgm(f, maxval);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw io_error("cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw io_error("write failed for " + path);
}

/// White (> maxval/2) = observed, black = hole.
inline Mask mask_from_graymap(const Graymap& g)
{
    std::vector<bool> observed(g.samples.size());
    bool any = false;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        observed[i] = 2 * g.samples[i] > g.maxval;
        any = any || observed[i];
    }
    if (!any)
        throw parse_error("mask is entirely black; nothing is observed", 0);
    return Mask(g.extents, std::move(observed));
}

inline Mask read_mask(const std::string& path, const Extents& expected)
{
    const Graymap g = read_graymap(path);
    require_same_extents(expected, g.extents, "mask vs image");
    return mask_from_graymap(g);
}

/// Binary flags as a black/white image (true = white).
inline ScalarField flags_image(const Extents& e, const std::vector<bool>& flags, double h = 1.0)
{
    if (flags.size() != e.count())
        throw size_error("flag count does not match extents");
    ScalarField f(e, h);
    for (std::size_t i = 0; i < flags.size(); ++i)
        f[i] = flags[i] ? 1.0 : 0.0;
    return f;
}

} // namespace hotv
