#include "negbound/io.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace negbound {

namespace {

constexpr char kTsvMagic[] = "#negbound-embeddings v1";
constexpr std::array<char, 16> kPackedMagic = {'N', 'E', 'G', 'B', 'O', 'U', 'N', 'D',
                                               'E', 'M', 'B', 'E', 'D', '\0', 'v', '1'};

void check_value(float v, std::int64_t row) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "embedding row " << row << " contains a non-finite value";
        throw std::runtime_error(os.str());
    }
}

void write_u32(std::ostream& out, std::uint32_t v) {
    std::array<unsigned char, 4> b = {static_cast<unsigned char>(v & 0xff),
                                      static_cast<unsigned char>((v >> 8) & 0xff),
                                      static_cast<unsigned char>((v >> 16) & 0xff),
                                      static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t read_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) throw std::runtime_error("packed embeddings: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

float read_f32(std::istream& in) {
    const std::uint32_t bits = read_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void save_tsv(const EmbeddingSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << kTsvMagic << " n=" << set.size() << " h=" << set.dim() << " c=" << set.n_classes
        << " normalized=" << (set.normalized ? 1 : 0) << "\n";
    char buf[64];
    for (std::int64_t i = 0; i < set.size(); ++i) {
        out << set.labels[static_cast<std::size_t>(i)];
        for (float v : set.features.row(i)) {
            std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
            out << '\t' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failure on " + path);
}

EmbeddingSet load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error(path + ": empty file");

    std::int64_t n = -1, h = -1;
    int c = -1, normalized = -1;
    {
        std::istringstream hs(header);
        std::string tag, version, field;
        hs >> tag >> version;
        if (tag != "#negbound-embeddings" || version != "v1") {
            throw std::runtime_error(path + ": not a negbound-embeddings v1 TSV header");
        }
        while (hs >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) {
                throw std::runtime_error(path + ": malformed header field '" + field + "'");
            }
            const std::string key = field.substr(0, eq);
            const long long value = std::stoll(field.substr(eq + 1));
            if (key == "n") n = value;
            else if (key == "h") h = value;
            else if (key == "c") c = static_cast<int>(value);
            else if (key == "normalized") normalized = static_cast<int>(value);
            else throw std::runtime_error(path + ": unknown header field '" + key + "'");
        }
    }
    if (n < 0 || h < 1 || c < 1 || normalized < 0 || normalized > 1) {
        throw std::runtime_error(path + ": incomplete or invalid header");
    }

    Matrix features(n, h);
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::string line;
    for (std::int64_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) {
            std::ostringstream os;
            os << path << ": expected " << n << " rows, file ends at line " << (i + 1);
            throw std::runtime_error(os.str());
        }
        std::istringstream ls(line);
        long long label;
        if (!(ls >> label)) {
            std::ostringstream os;
            os << path << " line " << (i + 2) << ": missing label";
            throw std::runtime_error(os.str());
        }
        if (label < 0 || label >= c) {
            std::ostringstream os;
            os << path << " line " << (i + 2) << ": class id " << label << " outside [0, " << c
               << ")";
            throw std::runtime_error(os.str());
        }
        labels[static_cast<std::size_t>(i)] = static_cast<int>(label);
        auto row = features.row(i);
        for (std::int64_t d = 0; d < h; ++d) {
            double v;
            if (!(ls >> v)) {
                std::ostringstream os;
                os << path << " line " << (i + 2) << ": expected " << h << " values, got " << d;
                throw std::runtime_error(os.str());
            }
            row[static_cast<std::size_t>(d)] = static_cast<float>(v);
            check_value(row[static_cast<std::size_t>(d)], i);
        }
        double extra;
        if (ls >> extra) {
            std::ostringstream os;
            os << path << " line " << (i + 2) << ": more than h=" << h << " values";
            throw std::runtime_error(os.str());
        }
    }
    return make_embedding_set(std::move(features), std::move(labels), c, normalized == 1);
}

void save_packed(const EmbeddingSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kPackedMagic.data(), kPackedMagic.size());
    write_u32(out, static_cast<std::uint32_t>(set.size()));
    write_u32(out, static_cast<std::uint32_t>(set.dim()));
    write_u32(out, static_cast<std::uint32_t>(set.n_classes));
    const char flag = set.normalized ? 1 : 0;
    out.write(&flag, 1);
    for (int y : set.labels) write_u32(out, static_cast<std::uint32_t>(y));
    for (float v : set.features.data) write_f32(out, v);
    if (!out) throw std::runtime_error("write failure on " + path);
}

EmbeddingSet load_packed(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::array<char, 16> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kPackedMagic) {
        throw std::runtime_error(path + ": missing NEGBOUNDEMBED v1 magic");
    }
    const std::int64_t n = read_u32(in);
    const std::int64_t h = read_u32(in);
    const int c = static_cast<int>(read_u32(in));
    char flag = 0;
    in.read(&flag, 1);
    if (!in || h < 1 || c < 1 || (flag != 0 && flag != 1)) {
        throw std::runtime_error(path + ": invalid packed header");
    }
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint32_t y = read_u32(in);
        if (y >= static_cast<std::uint32_t>(c)) {
            std::ostringstream os;
            os << path << ": class id " << y << " at row " << i << " outside [0, " << c << ")";
            throw std::runtime_error(os.str());
        }
        labels[static_cast<std::size_t>(i)] = static_cast<int>(y);
    }
    Matrix features(n, h);
    for (std::int64_t i = 0; i < n; ++i) {
        auto row = features.row(i);
        for (std::int64_t d = 0; d < h; ++d) {
            row[static_cast<std::size_t>(d)] = read_f32(in);
            check_value(row[static_cast<std::size_t>(d)], i);
        }
    }
    return make_embedding_set(std::move(features), std::move(labels), c, flag == 1);
}

}  // namespace

EmbeddingFormat format_from_string(const std::string& name) {
    if (name == "tsv") return EmbeddingFormat::tsv;
    if (name == "packed") return EmbeddingFormat::packed;
    throw std::invalid_argument("unknown embedding format '" + name + "' (want tsv or packed)");
}

void save_embeddings(const EmbeddingSet& set, const std::string& path, EmbeddingFormat format) {
    set.validate();
    if (format == EmbeddingFormat::tsv) {
        save_tsv(set, path);
    } else {
        save_packed(set, path);
    }
}

EmbeddingSet load_embeddings(const std::string& path, EmbeddingFormat format) {
    return format == EmbeddingFormat::tsv ? load_tsv(path) : load_packed(path);
}

EmbeddingSet load_embeddings_auto(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char first = 0;
    in.read(&first, 1);
    in.close();
    return load_embeddings(path, first == '#' ? EmbeddingFormat::tsv : EmbeddingFormat::packed);
}

}  // namespace negbound
