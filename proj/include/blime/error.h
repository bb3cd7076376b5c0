/*
 * Copyright 2026 The BLIME Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BLIME_ERROR_H_
#define BLIME_ERROR_H_

#include <stdexcept>
#include <string>

namespace blime {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments or malformed input data (images, label maps, matrices).
class InputError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// External predictor failure: timeout, malformed response, child exit.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure while reading inputs or writing outputs.
class IoError : public Error {
 public:
  using Error::Error;
};

// Raised by workers once cancellation has been requested (e.g. SIGINT).
class Cancelled : public Error {
 public:
  Cancelled() : Error("cancelled") {}
};

}  // namespace blime

#endif  // BLIME_ERROR_H_
