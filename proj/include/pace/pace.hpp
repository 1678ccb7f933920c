#pragma once

#include "baselines.hpp"
#include "counterfactual.hpp"
#include "dataset.hpp"
#include "dsl.hpp"
#include "effects.hpp"
#include "errors.hpp"
#include "estimation.hpp"
#include "expr.hpp"
#include "info.hpp"
#include "joint.hpp"
#include "model.hpp"
#include "support.hpp"
#include "transforms.hpp"
#include "variation.hpp"
