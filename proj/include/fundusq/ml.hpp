#pragma once

#include "fundusq/ml/dataset.hpp"
#include "fundusq/ml/evaluate.hpp"
#include "fundusq/ml/forest.hpp"
#include "fundusq/ml/logistic.hpp"
#include "fundusq/ml/model.hpp"
#include "fundusq/ml/pca.hpp"
#include "fundusq/ml/scaler.hpp"
#include "fundusq/ml/split.hpp"
#include "fundusq/ml/svm.hpp"
