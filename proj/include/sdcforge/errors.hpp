// Copyright 2026 The SDC-Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace sdcforge {

// Base for every toolkit error. Subcommands map these onto exit codes:
// input-shaped errors exit 2, statistical/validation errors exit 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define SDCFORGE_ERROR(Name)                                    \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

SDCFORGE_ERROR(UnknownDtype);
SDCFORGE_ERROR(InadmissibleCategory);
SDCFORGE_ERROR(UnobservableInjection);
SDCFORGE_ERROR(NotACorruption);

SDCFORGE_ERROR(SizeMismatch);
SDCFORGE_ERROR(ShapeMismatch);

SDCFORGE_ERROR(ContextMismatch);
SDCFORGE_ERROR(EmptyAccumulator);
SDCFORGE_ERROR(SchemaVersionMismatch);
SDCFORGE_ERROR(InvariantViolation);

SDCFORGE_ERROR(RateOverflow);
SDCFORGE_ERROR(NoAdmissibleMask);

SDCFORGE_ERROR(ZeroLfsrSeed);
SDCFORGE_ERROR(DimensionMismatch);
SDCFORGE_ERROR(InvalidBenchmark);
SDCFORGE_ERROR(UnknownFixture);

SDCFORGE_ERROR(IoError);

#undef SDCFORGE_ERROR

}  // namespace sdcforge
