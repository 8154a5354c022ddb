#include "crsh/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "crsh/error.hpp"

namespace crsh {

unsigned char encode_channel(double linear)
{
    if (!(linear > 0.0)) {
        return 0;
    }
    const double c = std::min(linear, 1.0);
    return static_cast<unsigned char>(std::lround(255.0 * std::pow(c, 1.0 / 2.2)));
}

void write_ppm(const FrameImage& image, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write image '" + path.string() + "'");
    }
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(image.width) * 3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const Rgb& c = image.at(x, y);
            row[3 * x + 0] = encode_channel(c.r);
            row[3 * x + 1] = encode_channel(c.g);
            row[3 * x + 2] = encode_channel(c.b);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) {
        throw IoError("failed while writing image '" + path.string() + "'");
    }
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in)
{
    std::string token;
    int c = 0;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!token.empty()) {
                break;
            }
            continue;
        }
        token.push_back(static_cast<char>(c));
    }
    return token;
}

} // namespace

PpmData read_ppm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open image '" + path.string() + "'");
    }
    if (header_token(in) != "P6") {
        throw IoError("'" + path.string() + "' is not a binary PPM");
    }
    PpmData data;
    try {
        data.width = std::stoi(header_token(in));
        data.height = std::stoi(header_token(in));
        if (std::stoi(header_token(in)) != 255) {
            throw IoError("unsupported PPM maxval in '" + path.string() + "'");
        }
    } catch (const std::logic_error&) {
        throw IoError("malformed PPM header in '" + path.string() + "'");
    }
    data.bytes.resize(static_cast<std::size_t>(data.width) * data.height * 3);
    in.read(reinterpret_cast<char*>(data.bytes.data()), static_cast<std::streamsize>(data.bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(data.bytes.size())) {
        throw IoError("truncated PPM '" + path.string() + "'");
    }
    return data;
}

} // namespace crsh
