#include "tensorrl/mdp_io.hpp"

#include "tensorrl/tensor_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace tensorrl {

namespace fs = std::filesystem;

void save_mdp(const fs::path& dir, const TabularMDP& mdp, const MdpMetadata& meta) {
    fs::create_directories(dir);
    save_tensor(dir / "transition.txt", mdp.transition());
    save_tensor(dir / "reward.txt", mdp.reward());
    std::ofstream os(dir / "meta.txt");
    if (!os) throw IoError("cannot write " + (dir / "meta.txt").string());
    os << "states: " << mdp.n_states() << '\n' << "actions:";
    for (auto a : mdp.action_sizes()) os << ' ' << a;
    os << '\n' << "discount: " << format_double(mdp.discount()) << '\n';
    if (meta.seed) os << "seed: " << *meta.seed << '\n';
    if (!meta.experiment.empty()) os << "experiment: " << meta.experiment << '\n';
}

LoadedMdp load_mdp(const fs::path& dir) {
    std::ifstream is(dir / "meta.txt");
    if (!is) throw IoError("cannot open " + (dir / "meta.txt").string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw FormatError("malformed metadata line '" + line + "'");
        auto value = line.substr(colon + 1);
        value.erase(0, value.find_first_not_of(' '));
        kv[line.substr(0, colon)] = value;
    }
    auto require = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError("metadata is missing '" + key + "'");
        return it->second;
    };

    const std::size_t states = std::stoul(require("states"));
    std::vector<std::size_t> actions;
    {
        std::istringstream ss(require("actions"));
        std::size_t a = 0;
        while (ss >> a) actions.push_back(a);
    }
    const double discount = parse_double(require("discount"));

    MdpMetadata meta;
    if (auto it = kv.find("seed"); it != kv.end()) meta.seed = std::stoull(it->second);
    if (auto it = kv.find("experiment"); it != kv.end()) meta.experiment = it->second;

    TabularMDP mdp(states, std::move(actions), load_tensor(dir / "transition.txt"), load_tensor(dir / "reward.txt"),
                   discount);
    return {std::move(mdp), std::move(meta)};
}

} // namespace tensorrl
