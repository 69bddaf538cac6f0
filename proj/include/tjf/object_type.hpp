// Copyright 2026 The TJF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TJF__OBJECT_TYPE_HPP_
#define TJF__OBJECT_TYPE_HPP_

#include "tjf/error.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace tjf
{

enum class ObjectType : std::size_t { Vehicle = 0, Pedestrian, Motorcyclist, Cyclist, Bus };

inline constexpr std::size_t kNumObjectTypes = 5;

inline constexpr std::array<ObjectType, kNumObjectTypes> kAllObjectTypes = {
  ObjectType::Vehicle, ObjectType::Pedestrian, ObjectType::Motorcyclist, ObjectType::Cyclist,
  ObjectType::Bus};

inline constexpr std::string_view to_string(ObjectType type) noexcept
{
  switch (type) {
    case ObjectType::Vehicle: return "vehicle";
    case ObjectType::Pedestrian: return "pedestrian";
    case ObjectType::Motorcyclist: return "motorcyclist";
    case ObjectType::Cyclist: return "cyclist";
    case ObjectType::Bus: return "bus";
  }
  return "unknown";
}

inline ObjectType object_type_from_string(std::string_view name)
{
  for (ObjectType t : kAllObjectTypes) {
    if (to_string(t) == name) {
      return t;
    }
  }
  throw Error(ErrorCode::UnknownObjectType, std::string(name));
}

inline constexpr std::size_t index_of(ObjectType type) noexcept
{
  return static_cast<std::size_t>(type);
}

}  // namespace tjf

#endif  // TJF__OBJECT_TYPE_HPP_
