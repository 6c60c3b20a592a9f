#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>

namespace binfwd {

// splitmix64 finalizer. The only source of pseudo-randomness in the project,
// so results do not depend on the standard library's RNG internals.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Incremental keyed hash over 64-bit words; used to derive independent
// seeded streams from (seed, role, indices...) keys.
class Absorber {
  public:
    Absorber() = default;
    explicit Absorber(std::uint64_t seed) { absorb(seed); }

    void absorb(std::uint64_t w) {
        state_ = mix64(state_ ^ w);
        ++len_;
    }
    void absorb(std::string_view tag) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ull;
        absorb(h);
    }
    std::uint64_t digest() const { return mix64(state_ ^ (len_ * 0x9e3779b97f4a7c15ull)); }

  private:
    std::uint64_t state_ = 0x6a09e667f3bcc909ull;
    std::uint64_t len_ = 0;
};

inline std::uint64_t key_hash(std::initializer_list<std::uint64_t> words) {
    Absorber a;
    for (auto w : words) a.absorb(w);
    return a.digest();
}

// Deterministic counter-based stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() { return mix64(state_ += 0x9e3779b97f4a7c15ull); }

    // uniform in [0, 1)
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : next() % n; }

    // inverse-CDF draw from a pmf row; zero-probability letters are never chosen
    int sample(std::span<const double> pmf) {
        double u = u01();
        double c = 0.0;
        int last_pos = 0;
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            if (pmf[i] <= 0.0) continue;
            c += pmf[i];
            last_pos = static_cast<int>(i);
            if (u < c) return last_pos;
        }
        return last_pos;  // fp residue lands on the last positive letter
    }

  private:
    std::uint64_t state_;
};

}  // namespace binfwd
