// include/mlctc/io.h

// Copyright 2026  mlctc authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MLCTC_IO_H_
#define MLCTC_IO_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlctc {

/// Whole-file helpers; throw Error naming the path on failure.
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

std::string EncodeLittleEndian(std::span<const double> values);
/// Throws FormatError unless bytes.size() is a multiple of 8.
std::vector<double> DecodeLittleEndian(std::string_view bytes);

/// Lower-case hex SHA-256.
std::string Sha256Hex(std::string_view bytes);

}  // namespace mlctc

#endif  // MLCTC_IO_H_
