#include "lerkit/error.hpp"

#include <utility>

namespace lerkit {

InvalidParam::InvalidParam(std::string field, std::string reason)
    : Error("invalid parameter '" + field + "': " + reason),
      field_(std::move(field)),
      reason_(std::move(reason)) {}

CapacityMismatch::CapacityMismatch(std::size_t window_capacity, std::size_t weight_count)
    : Error("window capacity " + std::to_string(window_capacity) + " does not match " +
            std::to_string(weight_count) + " weights") {}

Unachievable::Unachievable(double target_e, std::string detail)
    : Error("expected detection steps E=" + std::to_string(target_e) +
            " is unachievable: " + detail),
      target_(target_e) {}

InfeasibleMonotoneFit::InfeasibleMonotoneFit(std::size_t index)
    : Error("no monotone non-increasing weight fits the bounds at index " +
            std::to_string(index)),
      index_(index) {}

KeyExpired::KeyExpired(std::string entity)
    : Error("key of entity '" + entity + "' is not live"), entity_(std::move(entity)) {}

UnknownId::UnknownId(std::string id)
    : Error("unknown id '" + id + "'"), id_(std::move(id)) {}

LengthMismatch::LengthMismatch(std::size_t a, std::size_t b)
    : Error("bit string lengths differ: " + std::to_string(a) + " vs " + std::to_string(b)) {}

ParseError::ParseError(std::size_t line, std::string reason)
    : Error("line " + std::to_string(line) + ": " + reason),
      line_(line),
      reason_(std::move(reason)) {}

UnknownEntity::UnknownEntity(std::string id) : Error("entity '" + id + "' not in trace") {}

CoincidentCenters::CoincidentCenters() : Error("circle centers coincide") {}

}  // namespace lerkit
