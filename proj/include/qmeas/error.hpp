// Copyright 2026 The qmeas Authors
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

namespace qmeas {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Operands disagree on qubit count or matrix size.
class DimensionError : public Error {
   public:
    using Error::Error;
};

/// An argument is outside its documented range or malformed.
class InvalidArgument : public Error {
   public:
    using Error::Error;
};

/// The observable has nothing to measure (no non-identity term).
class DegenerateObservable : public Error {
   public:
    using Error::Error;
};

/// Some observable term is hit by no basis the plan can produce.
class CoverageError : public Error {
   public:
    using Error::Error;
};

/// A shot record carries a basis the plan could never have drawn.
class ForeignRecord : public Error {
   public:
    using Error::Error;
};

/// Text input could not be parsed. Carries the 1-based line number (0 if unknown).
class ParseError : public Error {
   public:
    ParseError(const std::string &what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {
    }
    std::size_t line() const noexcept {
        return line_;
    }

   private:
    std::size_t line_;
};

}  // namespace qmeas
