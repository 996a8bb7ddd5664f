#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cloudmirror {

inline constexpr double kEarthRadiusKm = 6371.0088;

inline constexpr const char* kRegistryHeader =
    "operator;street;house_number;zip;city;state;district;latitude;longitude;"
    "points;plug_types;power_kw";

struct Address {
  std::string street;
  std::string house_number;
  std::string zip;
  std::string city;
  std::string state;
  std::string district;

  bool operator==(const Address&) const = default;
};

struct ChargePoint {
  std::string plug_type;
  double power_kw = 0.0;

  bool operator==(const ChargePoint&) const = default;
};

struct Charger {
  std::size_t id = 0;  // position in the registry
  std::string operator_name;
  Address address;
  double latitude = 0.0;
  double longitude = 0.0;
  std::vector<ChargePoint> charge_points;

  bool operator==(const Charger&) const = default;
};

struct ChargerHit {
  const Charger* charger = nullptr;
  double distance_km = 0.0;
};

struct BoundingBox {
  double min_lat = 0.0, max_lat = 0.0, min_lon = 0.0, max_lon = 0.0;
};

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
/// Throws kDomain for coordinates outside [-90,90] x [-180,180].
double haversine_km(double lat1, double lon1, double lat2, double lon2);

/// Immutable charger list with a spatial index. Ids are list positions.
class Registry {
 public:
  Registry();
  explicit Registry(std::vector<Charger> chargers);
  ~Registry();
  Registry(Registry&&) noexcept;
  Registry& operator=(Registry&&) noexcept;

  std::size_t charger_count() const { return chargers_.size(); }
  const std::vector<Charger>& chargers() const { return chargers_; }

  /// Throws kNotFound for ids outside [0, count).
  const Charger& get_charger(long long id) const;

  /// Nearest charger by haversine distance, lowest id on ties.
  /// Throws kNotFound on an empty registry.
  ChargerHit closest_charger(double lat, double lon) const;

  /// Every charger within radius_km, ordered by (distance, id).
  std::vector<ChargerHit> chargers_in_range(double lat, double lon, double radius_km) const;

  /// Throws kNotFound on an empty registry.
  BoundingBox bounds() const;

 private:
  class SpatialIndex;
  std::vector<Charger> chargers_;
  std::unique_ptr<SpatialIndex> index_;
};

/// Parses the semicolon-separated charger table. Any bad row fails the whole
/// load, since skipping it would shift the ids of every later charger.
Registry load_registry(std::string_view csv);

std::string write_registry_csv(const std::vector<Charger>& chargers);

/// Seeded synthetic registry in the same schema, clustered around cities.
std::string generate_fixture_csv(std::size_t rows, std::uint64_t seed);

}  // namespace cloudmirror
