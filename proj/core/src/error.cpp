#include "ttsmt/error.hpp"

namespace ttsmt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
      return "validation";
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kBackend:
      return "backend";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace ttsmt
