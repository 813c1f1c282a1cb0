// Copyright 2026 The SeqForge Authors
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

#include "seqforge/error.hpp"

namespace seqforge {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSpanCrossesToken: return "SpanCrossesToken";
    case ErrorCode::kOverlappingSpans: return "OverlappingSpans";
    case ErrorCode::kMalformedAnnLine: return "MalformedAnnLine";
    case ErrorCode::kOffsetOutOfRange: return "OffsetOutOfRange";
    case ErrorCode::kSurfaceMismatch: return "SurfaceMismatch";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kUnknownLabelForm: return "UnknownLabelForm";
    case ErrorCode::kMissingAnnotation: return "MissingAnnotation";
    case ErrorCode::kFileUnreadable: return "FileUnreadable";
    case ErrorCode::kEmptyTable: return "EmptyTable";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kMissingRequiredKey: return "MissingRequiredKey";
    case ErrorCode::kTypeError: return "TypeError";
    case ErrorCode::kRangeError: return "RangeError";
    case ErrorCode::kDocumentMismatch: return "DocumentMismatch";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace seqforge
