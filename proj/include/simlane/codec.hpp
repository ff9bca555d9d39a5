#pragma once

// JSON encodings of the message payloads. Doubles are written in shortest
// round-trip form, so decode(encode(x)) == x bit for bit.

#include <string>

#include <json.hpp>

#include "simlane/messages.hpp"

namespace simlane {

using Json = nlohmann::json;

void to_json(Json& j, const Vec2& v);
void from_json(const Json& j, Vec2& v);
void to_json(Json& j, const Pose2D& p);
void from_json(const Json& j, Pose2D& p);
void to_json(Json& j, const EntityState& e);
void from_json(const Json& j, EntityState& e);
void to_json(Json& j, const ObjectInfo& o);
void from_json(const Json& j, ObjectInfo& o);
void to_json(Json& j, const CollisionEvent& c);
void from_json(const Json& j, CollisionEvent& c);
void to_json(Json& j, const DetectedObject& d);
void from_json(const Json& j, DetectedObject& d);

Json encode_payload(const Payload& payload);
/// Throws nlohmann::json::exception on shape mismatch, or LoadError on an
/// unknown kind.
Payload decode_payload(const std::string& kind, const Json& j);

}  // namespace simlane
