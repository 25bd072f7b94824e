#include "scclg/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <tuple>

#include "scclg/errors.hpp"

namespace scclg {

namespace {

constexpr const char* kMagic = "scclg-checkpoint";

std::uint64_t to_little(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
    return v;
}

}  // namespace

void Checkpoint::put(std::string name, Matrix value) {
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos)
        throw Error("checkpoint entry names must be non-empty and whitespace-free: '" + name + "'");
    for (auto& [n, m] : entries_) {
        if (n == name) {
            m = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(name), std::move(value));
}

const Matrix& Checkpoint::get(const std::string& name) const {
    for (const auto& [n, m] : entries_)
        if (n == name) return m;
    throw Error("checkpoint has no entry '" + name + "'");
}

bool Checkpoint::contains(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.first == name) return true;
    return false;
}

void Checkpoint::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << kMagic << " 1\n" << "entries " << entries_.size() << "\n";
    for (const auto& [n, m] : entries_) out << n << ' ' << m.rows() << ' ' << m.cols() << '\n';
    out << "data\n";
    for (const auto& e : entries_) {
        for (double v : e.second.values()) {
            const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
            out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() {
        ++lineno;
        if (!std::getline(in, line)) throw ParseError(lineno, "truncated checkpoint manifest");
        return std::istringstream(line);
    };

    {
        auto ss = next_line();
        std::string magic;
        int version = 0;
        if (!(ss >> magic >> version) || magic != kMagic || version != 1)
            throw ParseError(lineno, "not a version-1 checkpoint");
    }
    std::size_t count = 0;
    {
        auto ss = next_line();
        std::string tag;
        if (!(ss >> tag >> count) || tag != "entries") throw ParseError(lineno, "expected 'entries <N>'");
    }
    std::vector<std::tuple<std::string, std::size_t, std::size_t>> manifest;
    for (std::size_t i = 0; i < count; ++i) {
        auto ss = next_line();
        std::string name;
        std::size_t r = 0, c = 0;
        if (!(ss >> name >> r >> c)) throw ParseError(lineno, "expected '<name> <rows> <cols>'");
        manifest.emplace_back(name, r, c);
    }
    if (next_line().str() != "data") throw ParseError(lineno, "expected 'data'");

    Checkpoint ck;
    for (auto& [name, r, c] : manifest) {
        std::vector<double> vals(r * c);
        for (double& v : vals) {
            std::uint64_t bits = 0;
            if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits))
                throw IoError("checkpoint '" + path.string() + "' is truncated in entry '" + name + "'");
            v = std::bit_cast<double>(to_little(bits));
        }
        ck.entries_.emplace_back(name, Matrix(r, c, std::move(vals)));
    }
    return ck;
}

}  // namespace scclg
