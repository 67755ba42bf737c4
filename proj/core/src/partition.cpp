#include "smcgen/partition.hpp"

#include <algorithm>

#include "smcgen/errors.hpp"

namespace smcgen {

Partition Partition::singletons(int n) {
    if (n < 1) throw InputError("partition: ground set must be nonempty");
    std::vector<std::vector<int>> blocks(n);
    for (int i = 0; i < n; ++i) blocks[i] = {i + 1};
    return Partition(n, std::move(blocks));
}

Partition Partition::single_block(int n) {
    if (n < 1) throw InputError("partition: ground set must be nonempty");
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i + 1;
    return Partition(n, {std::move(all)});
}

Partition Partition::from_rgs(const std::vector<int>& rgs) {
    const int n = static_cast<int>(rgs.size());
    if (n < 1) throw InputError("partition: empty growth string");
    int max_seen = -1;
    for (int id : rgs) {
        if (id < 0 || id > max_seen + 1)
            throw InputError("partition: growth string violates first-occurrence order");
        max_seen = std::max(max_seen, id);
    }
    std::vector<std::vector<int>> blocks(max_seen + 1);
    for (int i = 0; i < n; ++i) blocks[rgs[i]].push_back(i + 1);
    return Partition(n, std::move(blocks));
}

Partition Partition::from_blocks(int n, std::vector<std::vector<int>> blocks) {
    std::vector<char> seen(n + 1, 0);
    int covered = 0;
    for (auto& block : blocks) {
        if (block.empty()) throw InputError("partition: empty block");
        std::sort(block.begin(), block.end());
        for (int e : block) {
            if (e < 1 || e > n) throw InputError("partition: element outside ground set");
            if (seen[e]) throw InputError("partition: duplicate element");
            seen[e] = 1;
            ++covered;
        }
    }
    if (covered != n) throw InputError("partition: blocks do not cover the ground set");
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return Partition(n, std::move(blocks));
}

int Partition::block_containing(int element) const {
    for (int b = 0; b < num_blocks(); ++b) {
        if (std::binary_search(blocks_[b].begin(), blocks_[b].end(), element)) return b;
    }
    throw InputError("partition: element outside ground set");
}

std::vector<int> Partition::to_rgs() const {
    std::vector<int> rgs(ground_size_);
    for (int b = 0; b < num_blocks(); ++b)
        for (int e : blocks_[b]) rgs[e - 1] = b;
    return rgs;
}

bool Partition::is_coarsening_of(const Partition& finer) const {
    return merge_profile(finer, *this).has_value();
}

Partition Partition::merge_blocks(int block_a, int block_b) const {
    if (block_a == block_b || block_a < 0 || block_b < 0 || block_a >= num_blocks() ||
        block_b >= num_blocks())
        throw InputError("partition: bad block indices for merge");
    std::vector<std::vector<int>> blocks;
    blocks.reserve(blocks_.size() - 1);
    std::vector<int> merged = blocks_[block_a];
    merged.insert(merged.end(), blocks_[block_b].begin(), blocks_[block_b].end());
    std::sort(merged.begin(), merged.end());
    for (int b = 0; b < num_blocks(); ++b)
        if (b != block_a && b != block_b) blocks.push_back(blocks_[b]);
    blocks.push_back(std::move(merged));
    return from_blocks(ground_size_, std::move(blocks));
}

std::string Partition::label() const {
    std::string out;
    for (const auto& block : blocks_) {
        out += '{';
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (i > 0) out += ',';
            out += std::to_string(block[i]);
        }
        out += '}';
    }
    return out;
}

namespace {

void enumerate_rgs(int n, int position, int max_used, std::vector<int>& rgs,
                   std::vector<Partition>& out) {
    if (position == n) {
        out.push_back(Partition::from_rgs(rgs));
        return;
    }
    // Descending digit order gives descending lexicographic output overall.
    for (int id = max_used + 1; id >= 0; --id) {
        rgs[position] = id;
        enumerate_rgs(n, position + 1, std::max(max_used, id), rgs, out);
    }
}

} // namespace

std::vector<Partition> enumerate_partitions(int n) {
    if (n < 1 || n > 6) throw InputError("enumerate_partitions: supported range is 1..6");
    std::vector<Partition> out;
    std::vector<int> rgs(n, 0);
    enumerate_rgs(n, 1, 0, rgs, out);
    return out;
}

std::optional<std::vector<int>> merge_profile(const Partition& finer, const Partition& coarser) {
    if (finer.ground_size() != coarser.ground_size()) return std::nullopt;
    if (coarser.num_blocks() > finer.num_blocks()) return std::nullopt;
    std::vector<int> profile(coarser.num_blocks(), 0);
    const auto coarse_rgs = coarser.to_rgs();
    for (const auto& block : finer.blocks()) {
        const int target = coarse_rgs[block.front() - 1];
        for (int e : block)
            if (coarse_rgs[e - 1] != target) return std::nullopt;
        ++profile[target];
    }
    return profile;
}

} // namespace smcgen
