#ifndef KSVM_MODEL_IO_HPP
#define KSVM_MODEL_IO_HPP

#include <string>

#include "ksvm/ipm.hpp"

namespace ksvm {

class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Versioned JSON model file. Serialization is canonical: write -> read ->
/// write reproduces the bytes.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

}  // namespace ksvm

#endif
