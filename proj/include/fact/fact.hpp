#pragma once

#include "fact/surjection.hpp"
#include "fact/configuration.hpp"
#include "fact/matrix.hpp"
#include "fact/fiber.hpp"
#include "fact/report.hpp"
#include "fact/structure.hpp"
#include "fact/laws.hpp"
#include "fact/glue.hpp"
#include "fact/pullback.hpp"
#include "fact/universal.hpp"
#include "fact/serialization.hpp"
