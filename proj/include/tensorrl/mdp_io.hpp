#pragma once

#include "tensorrl/mdp.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace tensorrl {

struct MdpMetadata {
    std::string experiment;
    std::optional<std::uint64_t> seed;
};

struct LoadedMdp {
    TabularMDP mdp;
    MdpMetadata metadata;
};

// Directory layout: transition.txt and reward.txt in the tensor text format,
// plus meta.txt with `states`, `actions`, `discount`, `seed` and `experiment`.
void save_mdp(const std::filesystem::path& dir, const TabularMDP& mdp, const MdpMetadata& meta = {});
LoadedMdp load_mdp(const std::filesystem::path& dir);

} // namespace tensorrl
