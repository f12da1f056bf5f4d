#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace glex {

// A subset of feature indices, packed into a 64-bit mask. Models wider than
// 64 features are rejected at load time, before any mask is formed.
class FeatureSet {
public:
    constexpr FeatureSet() = default;
    constexpr explicit FeatureSet(std::uint64_t bits) : bits_(bits) {}

    static constexpr FeatureSet single(int k) { return FeatureSet(std::uint64_t(1) << k); }

    static FeatureSet of(std::initializer_list<int> ks) {
        FeatureSet s;
        for (int k : ks) s = s.with(k);
        return s;
    }

    // All features below d.
    static constexpr FeatureSet full(int d) {
        return FeatureSet(d >= 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << d) - 1);
    }

    constexpr std::uint64_t bits() const { return bits_; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr int count() const { return std::popcount(bits_); }
    constexpr bool contains(int k) const { return (bits_ >> k) & 1; }
    constexpr bool is_subset_of(FeatureSet o) const { return (bits_ & ~o.bits_) == 0; }
    constexpr bool intersects(FeatureSet o) const { return (bits_ & o.bits_) != 0; }

    constexpr FeatureSet with(int k) const { return FeatureSet(bits_ | (std::uint64_t(1) << k)); }
    constexpr FeatureSet without(int k) const { return FeatureSet(bits_ & ~(std::uint64_t(1) << k)); }

    friend constexpr FeatureSet operator|(FeatureSet a, FeatureSet b) { return FeatureSet(a.bits_ | b.bits_); }
    friend constexpr FeatureSet operator&(FeatureSet a, FeatureSet b) { return FeatureSet(a.bits_ & b.bits_); }
    // set difference
    friend constexpr FeatureSet operator-(FeatureSet a, FeatureSet b) { return FeatureSet(a.bits_ & ~b.bits_); }

    friend constexpr bool operator==(FeatureSet a, FeatureSet b) { return a.bits_ == b.bits_; }
    friend constexpr bool operator!=(FeatureSet a, FeatureSet b) { return a.bits_ != b.bits_; }
    friend constexpr bool operator<(FeatureSet a, FeatureSet b) { return a.bits_ < b.bits_; }

    int lowest() const { return std::countr_zero(bits_); }

    std::vector<int> indices() const {
        std::vector<int> out;
        out.reserve(count());
        for (std::uint64_t m = bits_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
        return out;
    }

    // Rank of this set among the subsets of `super`: bit i of the rank is the
    // membership of the i-th lowest feature of `super`. Requires *this ⊆ super.
    int rank_within(FeatureSet super) const {
        int rank = 0;
        int pos = 0;
        for (std::uint64_t m = super.bits_; m != 0; m &= m - 1, ++pos) {
            if (bits_ & (m & -m)) rank |= 1 << pos;
        }
        return rank;
    }

    // Inverse of rank_within.
    static FeatureSet from_rank(int rank, FeatureSet super) {
        std::uint64_t out = 0;
        int pos = 0;
        for (std::uint64_t m = super.bits_; m != 0; m &= m - 1, ++pos) {
            if ((rank >> pos) & 1) out |= m & -m;
        }
        return FeatureSet(out);
    }

private:
    std::uint64_t bits_ = 0;
};

// Visits every subset W ⊆ s exactly once, in descending mask order (s first,
// the empty set last).
template <typename F>
void for_each_subset_desc(FeatureSet s, F&& f) {
    const std::uint64_t m = s.bits();
    for (std::uint64_t w = m;; w = (w - 1) & m) {
        f(FeatureSet(w));
        if (w == 0) break;
    }
}

}  // namespace glex
