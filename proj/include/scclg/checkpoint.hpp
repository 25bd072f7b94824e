#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "scclg/matrix.hpp"

namespace scclg {

/// Ordered list of named matrices.
///
/// On disk: a text manifest
///
///     scclg-checkpoint 1
///     entries <N>
///     <name> <rows> <cols>      (N lines)
///     data
///
/// followed immediately by the values of every entry, in manifest order and
/// row-major, as 64-bit little-endian IEEE doubles.
class Checkpoint {
public:
    void put(std::string name, Matrix value);
    const Matrix& get(const std::string& name) const;
    bool contains(const std::string& name) const;
    const std::vector<std::pair<std::string, Matrix>>& entries() const { return entries_; }

    void save(const std::filesystem::path& path) const;
    static Checkpoint load(const std::filesystem::path& path);

    bool operator==(const Checkpoint&) const = default;

private:
    std::vector<std::pair<std::string, Matrix>> entries_;
};

}  // namespace scclg
