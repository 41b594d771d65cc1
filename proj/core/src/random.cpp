#include "whichpath/random.hpp"

#include <cmath>

namespace whichpath {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

Rng Rng::substream(std::uint64_t index) const {
  return Rng(splitmix64(splitmix64(seed_) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace whichpath
