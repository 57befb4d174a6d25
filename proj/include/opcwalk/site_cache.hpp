#pragma once

// Sharded site-keyed memo cache.  Values are pure functions of the site, so
// concurrent fills race benignly (both compute the same value) and wholesale
// eviction of a full shard is always safe.

#include <cstddef>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "opcwalk/site.hpp"

namespace opcwalk {

template <typename Value>
class SiteCache {
public:
    explicit SiteCache(std::size_t shard_cap = 1u << 16, int shards = 64)
        : shard_cap_(shard_cap), shards_(static_cast<std::size_t>(shards)) {}

    bool lookup(const Site& s, Value& out) const {
        const Shard& sh = shard_for(s);
        std::lock_guard<std::mutex> lock(sh.mutex);
        auto it = sh.map.find(s);
        if (it == sh.map.end()) return false;
        out = it->second;
        return true;
    }

    // Insert or overwrite; evicts the whole shard first when it is full.
    void store(const Site& s, const Value& v) {
        Shard& sh = shard_for(s);
        std::lock_guard<std::mutex> lock(sh.mutex);
        if (sh.map.size() >= shard_cap_) sh.map.clear();
        sh.map[s] = v;
    }

    // Read-modify-write under the shard lock; fn(Value&, bool present).
    template <typename Fn>
    void update(const Site& s, Fn&& fn) {
        Shard& sh = shard_for(s);
        std::lock_guard<std::mutex> lock(sh.mutex);
        if (sh.map.size() >= shard_cap_) sh.map.clear();
        auto [it, inserted] = sh.map.try_emplace(s);
        fn(it->second, !inserted);
    }

    std::size_t entries() const {
        std::size_t total = 0;
        for (const Shard& sh : shards_) {
            std::lock_guard<std::mutex> lock(sh.mutex);
            total += sh.map.size();
        }
        return total;
    }

private:
    struct Shard {
        mutable std::mutex mutex;
        std::unordered_map<Site, Value, SiteHasher> map;
    };

    Shard& shard_for(const Site& s) const {
        std::size_t i = SiteHasher{}(s) % shards_.size();
        return const_cast<Shard&>(shards_[i]);
    }

    std::size_t shard_cap_;
    mutable std::vector<Shard> shards_;
};

}  // namespace opcwalk
