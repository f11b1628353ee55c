#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "siglasso/paths.hpp"

namespace siglasso {

// Number of coefficients of a depth-N signature of a d-channel path,
// 1 + d + d^2 + ... + d^N. Throws on overflow.
std::int64_t sig_dim(int channels, int depth);

// A word over the alphabet {1, ..., d}; the empty word labels the order-0
// coefficient.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<int> letters) : letters_(letters) {}
  explicit Word(std::vector<int> letters) : letters_(std::move(letters)) {}

  int length() const { return static_cast<int>(letters_.size()); }
  const std::vector<int>& letters() const { return letters_; }

  // Position of the word among all words of its length in lexicographic
  // order (base-d digits, letters 1-based).
  std::int64_t index(int channels) const;

  // Inverse of index() for words of length k.
  static Word from_index(int channels, int length, std::int64_t index);

  // "1,2,1" (empty string for the empty word)
  std::string to_string() const;
  static Word parse(const std::string& text);

 private:
  std::vector<int> letters_;
};

// Signature of a path truncated at depth N: layers 0..N of iterated-integral
// coefficients, layer k stored as a flat array of length d^k with words in
// lexicographic order. Layer 0 is always the scalar 1.
class TruncatedSignature {
 public:
  // The unit signature (1, 0, ..., 0).
  TruncatedSignature(int channels, int depth);

  int channels() const { return channels_; }
  int depth() const { return depth_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  std::span<const double> layer(int k) const;
  std::span<double> layer(int k);

  // Flat view of all layers, layer 0 first.
  std::span<const double> flat() const { return data_; }

  double coefficient(const Word& word) const;

 private:
  int channels_ = 0;
  int depth_ = 0;
  std::vector<std::int64_t> offsets_;  // offsets_[k] = start of layer k
  std::vector<double> data_;
};

// Signature of a single linear segment with the given increment: layer k is
// the tensor power increment^{(x)k} / k! (the truncated tensor exponential).
TruncatedSignature segment_signature(std::span<const double> increment,
                                     int depth);

// Truncated tensor-algebra product; by Chen's identity this is the signature
// of the concatenation when both arguments are path signatures.
TruncatedSignature chen_product(const TruncatedSignature& left,
                                const TruncatedSignature& right);

// In-place Chen product with the exponential of a segment increment.
// Equivalent to sig = chen_product(sig, segment_signature(increment, N)).
void extend_with_segment(TruncatedSignature& sig,
                         std::span<const double> increment);

// Signature of the path restricted to [first knot, t_end].
TruncatedSignature path_signature(const PiecewiseLinearPath& path, int depth,
                                  double t_end);

// Signatures of all prefixes [start, t] for t in the increasing list `times`,
// computed by extending one running Chen product (total cost
// O(#knots * d^N) plus one product per requested time).
std::vector<TruncatedSignature> prefix_signatures(
    const PiecewiseLinearPath& path, int depth, std::span<const double> times);

// Euclidean norm of the difference between the layer-k coefficient blocks.
double layer_sup_distance(const TruncatedSignature& a,
                          const TruncatedSignature& b, int k);

// Signature of the path with all values multiplied by factor: layer k is
// scaled by factor^k. Exact consequence of the multilinearity of iterated
// integrals.
TruncatedSignature scale_path_values(const TruncatedSignature& sig,
                                     double factor);

}  // namespace siglasso
