#pragma once

#include "budgeted/rational.hpp"
#include "budgeted/arm_model.hpp"
#include "budgeted/arm_io.hpp"
#include "budgeted/single_arm_policy.hpp"
#include "budgeted/profit_curve.hpp"
#include "budgeted/system.hpp"
#include "budgeted/oracle.hpp"
#include "budgeted/gittins.hpp"
#include "budgeted/policies.hpp"
#include "budgeted/evaluator.hpp"
#include "budgeted/random_instances.hpp"
#include "budgeted/experiment.hpp"
#include "budgeted/certify.hpp"
