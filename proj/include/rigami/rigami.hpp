#pragma once

#include <rigami/core.hpp>
#include <rigami/elastic.hpp>
#include <rigami/embedding.hpp>
#include <rigami/generators.hpp>
#include <rigami/io.hpp>
#include <rigami/kinematics.hpp>
#include <rigami/numerics.hpp>
#include <rigami/pattern.hpp>
#include <rigami/sequential.hpp>
