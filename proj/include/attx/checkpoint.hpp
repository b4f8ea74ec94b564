#pragma once

#include "attx/params.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace attx {

// Checkpoints are a JSON manifest (parameter names, shapes, byte offsets plus
// caller metadata) next to a flat little-endian binary of IEEE-754 doubles.
// Round-trips are bit-exact.

// `path` may end in ".json"; the binary lands next to it with ".bin".
void save_checkpoint(const std::string& path, const std::vector<NamedParam>& params,
                     const std::vector<NamedState>& state, const nlohmann::json& meta);

class Checkpoint {
public:
    explicit Checkpoint(const std::string& path);

    const nlohmann::json& meta() const { return meta_; }
    bool has(const std::string& name) const;
    std::vector<std::size_t> shape(const std::string& name) const;
    std::vector<double> values(const std::string& name) const;

    // Strict restore: every param/state entry must exist with matching size.
    void restore(std::vector<NamedParam>& params, const std::vector<NamedState>& state) const;

private:
    struct Entry {
        std::vector<std::size_t> shape;
        std::size_t offset = 0;
        std::size_t count = 0;
    };
    const Entry& find(const std::string& name) const;

    nlohmann::json meta_;
    std::vector<std::pair<std::string, Entry>> entries_;
    std::vector<double> blob_;
};

}  // namespace attx
