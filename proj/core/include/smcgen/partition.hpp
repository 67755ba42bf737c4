#pragma once

#include <optional>
#include <string>
#include <vector>

namespace smcgen {

// Set partition of [n] = {1, ..., n}. Blocks are kept in canonical form:
// elements ascending within each block, blocks ordered by least element.
class Partition {
public:
    static Partition singletons(int n);
    static Partition single_block(int n);

    // rgs[i] is the block id of element i+1; ids appear in first-occurrence
    // order starting from 0 (restricted growth condition).
    static Partition from_rgs(const std::vector<int>& rgs);

    // Validates disjointness and coverage of [n], then canonicalizes.
    static Partition from_blocks(int n, std::vector<std::vector<int>> blocks);

    int ground_size() const { return ground_size_; }
    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }

    // Index (0-based, canonical order) of the block containing an element.
    int block_containing(int element) const;

    std::vector<int> to_rgs() const;

    // True if this partition can be obtained from `finer` by merging blocks
    // (equality counts).
    bool is_coarsening_of(const Partition& finer) const;

    // Merge two blocks by canonical index; result is recanonicalized.
    Partition merge_blocks(int block_a, int block_b) const;

    // Canonical block notation, e.g. "{1,3}{2}".
    std::string label() const;

    bool operator==(const Partition& other) const { return blocks_ == other.blocks_; }
    bool operator!=(const Partition& other) const { return !(*this == other); }
    bool operator<(const Partition& other) const { return blocks_ < other.blocks_; }

private:
    Partition(int n, std::vector<std::vector<int>> blocks)
        : ground_size_(n), blocks_(std::move(blocks)) {}

    int ground_size_ = 0;
    std::vector<std::vector<int>> blocks_;
};

// All set partitions of [n] for 1 <= n <= 6, in descending lexicographic
// order of their restricted growth strings: the all-singletons partition
// comes first, the single block last. The cap keeps Bell(n) small (203 at
// n = 6).
std::vector<Partition> enumerate_partitions(int n);

// If `coarser` is a coarsening of `finer`, returns for each block of
// `coarser` (in canonical order) the number of `finer` blocks merged into
// it; otherwise nullopt.
std::optional<std::vector<int>> merge_profile(const Partition& finer, const Partition& coarser);

} // namespace smcgen
