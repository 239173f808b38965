#pragma once

// Abelian group G = (Z_q*, *) acting on a set S of protocol values.
//
// Two backends are provided:
//   modexp   - S is the order-q subgroup of F_p*, and g . h = h^g mod p
//   elliptic - S is a prime-order subgroup of a short Weierstrass curve over
//              F_p, and g . P = gP
//
// The orbit G . s of a base point s is the set every protocol value lives
// in. Because G excludes 0, the orbit never contains the group identity (1
// for modexp, the point at infinity for elliptic).

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ikalab/rng.hpp"

namespace ikalab {

struct AffinePoint {
  std::uint64_t x = 0;
  std::uint64_t y = 0;

  friend auto operator<=>(const AffinePoint&, const AffinePoint&) = default;
};

// An element of S, tagged by backend. The elliptic identity is an explicit
// marker, never a coordinate pair.
class SetPoint {
 public:
  static SetPoint residue(std::uint64_t value) { return SetPoint(Payload(value)); }
  static SetPoint affine(std::uint64_t x, std::uint64_t y) { return SetPoint(Payload(AffinePoint{x, y})); }
  static SetPoint infinity() { return SetPoint(Payload(Infinity{})); }

  bool is_residue() const { return std::holds_alternative<std::uint64_t>(payload_); }
  bool is_affine() const { return std::holds_alternative<AffinePoint>(payload_); }
  bool is_infinity() const { return std::holds_alternative<Infinity>(payload_); }

  std::uint64_t residue_value() const;
  AffinePoint affine_value() const;

  // Transcript encoding: decimal residue, "x,y", or "inf".
  std::string encode() const;
  static SetPoint decode(std::string_view text);

  friend bool operator==(const SetPoint&, const SetPoint&) = default;

 private:
  struct Infinity {
    friend bool operator==(Infinity, Infinity) = default;
  };
  using Payload = std::variant<std::uint64_t, AffinePoint, Infinity>;

  explicit SetPoint(Payload payload) : payload_(payload) {}

  Payload payload_;
};

// Element of Z_q*. Range is enforced by GroupAction::scalar().
struct GroupScalar {
  std::uint64_t value = 1;

  friend auto operator<=>(const GroupScalar&, const GroupScalar&) = default;
};

enum class Backend { modexp, elliptic };

struct ModexpParams {
  std::uint64_t p = 0;  // field prime
  std::uint64_t q = 0;  // prime order of s, divides p - 1
  std::uint64_t s = 0;  // generator of the order-q subgroup
};

struct EllipticParams {
  std::uint64_t p = 0;  // field prime
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  AffinePoint s;        // base point
  std::uint64_t q = 0;  // prime order of s
};

// Validated parameter set. Construction throws ConfigError naming the field
// that fails.
class ActionParams {
 public:
  static ActionParams modexp(ModexpParams params);
  static ActionParams elliptic(EllipticParams params);

  // Named desk-scale presets: "modexp" (p=23, q=11, s=2) and
  // "elliptic" (y^2 = x^3 + 2x + 2 over F_17, s=(5,1), q=19).
  static ActionParams preset(std::string_view name);

  Backend backend() const;
  std::string_view backend_name() const;
  std::uint64_t order() const;
  SetPoint base() const;

  const ModexpParams& modexp_params() const { return std::get<ModexpParams>(params_); }
  const EllipticParams& elliptic_params() const { return std::get<EllipticParams>(params_); }

  friend bool operator==(const ActionParams&, const ActionParams&);

 private:
  explicit ActionParams(std::variant<ModexpParams, EllipticParams> params) : params_(params) {}

  std::variant<ModexpParams, EllipticParams> params_;
};

bool is_prime(std::uint64_t n);

class GroupAction {
 public:
  explicit GroupAction(ActionParams params) : params_(std::move(params)) {}

  const ActionParams& params() const { return params_; }
  std::uint64_t order() const { return params_.order(); }
  SetPoint base() const { return params_.base(); }

  // Checked constructor for G. Throws ContextError outside [1, q-1].
  GroupScalar scalar(std::uint64_t value) const;
  GroupScalar identity() const { return GroupScalar{1}; }

  // g . x. Throws ContextError if x belongs to the other backend or g is
  // out of range, InvalidPointError if x is not in the orbit.
  SetPoint act(GroupScalar g, const SetPoint& x) const;

  GroupScalar compose(GroupScalar g, GroupScalar h) const;
  GroupScalar invert(GroupScalar g) const;
  GroupScalar product(std::span<const GroupScalar> factors) const;

  // Uniform over [1, q-1].
  GroupScalar random_scalar(Rng& rng) const;
  // Uniform over [2, q-1]; the identity carries no secret.
  GroupScalar random_nonidentity_scalar(Rng& rng) const;
  SetPoint random_orbit_point(Rng& rng, const SetPoint& base) const;

  bool validate_point(const SetPoint& x) const;

  // Decodes and validates a transcript-encoded point.
  SetPoint decode_point(std::string_view text) const;

 private:
  void check_scalar(GroupScalar g) const;
  void check_point(const SetPoint& x) const;

  ActionParams params_;
};

}  // namespace ikalab
