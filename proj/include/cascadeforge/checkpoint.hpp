#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cascadeforge/policy_net.hpp"

namespace cascadeforge {

// Versioned text container for trained parameters plus the configuration
// echo needed to reuse them (detector pool, reward curve, seeds). Layout is
// documented in the README and stable.
struct Checkpoint {
    PolicyParams params;
    std::vector<std::pair<std::string, std::string>> config;

    const std::string* find(const std::string& key) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace cascadeforge
