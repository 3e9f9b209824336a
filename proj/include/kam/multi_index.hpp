#ifndef KAM_MULTI_INDEX_HPP
#define KAM_MULTI_INDEX_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace kam {

// Exponent vector packed into a fixed array; at most kMaxVars variables,
// each exponent at most 255.
class MultiIndex {
public:
    static constexpr int kMaxVars = 16;
    static constexpr int kMaxExponent = 255;

    MultiIndex() = default;
    explicit MultiIndex(int nvars);
    MultiIndex(std::initializer_list<int> exps);
    explicit MultiIndex(std::span<const int> exps);

    int size() const { return n_; }
    int degree() const { return deg_; }
    int operator[](int v) const { return e_[static_cast<std::size_t>(v)]; }
    void set(int v, int value);
    std::vector<int> to_vector() const;

    // Unit vector e_v of length n.
    static MultiIndex unit(int n, int v);

    MultiIndex operator+(const MultiIndex &o) const;
    // Componentwise o <= *this.
    bool contains(const MultiIndex &o) const;
    MultiIndex operator-(const MultiIndex &o) const;

    // Restriction to the slice [offset, offset + len).
    MultiIndex slice(int offset, int len) const;

    std::string to_string() const;

    friend bool operator==(const MultiIndex &a, const MultiIndex &b)
    {
        return a.n_ == b.n_ && a.e_ == b.e_;
    }
    friend bool operator!=(const MultiIndex &a, const MultiIndex &b) { return !(a == b); }

    // Graded order: total degree first, then lexicographically descending
    // exponents (x^2 before xy before y^2).
    friend bool operator<(const MultiIndex &a, const MultiIndex &b)
    {
        if (a.deg_ != b.deg_) {
            return a.deg_ < b.deg_;
        }
        return std::lexicographical_compare(b.e_.begin(), b.e_.end(), a.e_.begin(), a.e_.end());
    }

    std::size_t hash() const;

private:
    std::array<std::uint8_t, kMaxVars> e_{};
    std::uint8_t n_ = 0;
    std::uint16_t deg_ = 0;
};

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex &m) const { return m.hash(); }
};

} // namespace kam

#endif
