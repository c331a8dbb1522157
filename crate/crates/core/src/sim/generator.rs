//! Random deterministic sim classes over a small key/value alphabet, so that
//! tests collide on shared keys often enough to produce order dependence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SimClass, SimStatement, SimSuite, SimTest, ORACLE_TEST_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    pub seed: u64,
    pub classes: usize,
    pub max_tests: usize,
    pub max_statements: usize,
    pub keys: usize,
    pub values: usize,
    /// Chance (in percent) that a class gets a fixture.
    pub fixture_percent: u32,
    /// Relative weight of crash statements against a total of 100.
    pub crash_weight: u32,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            seed: 2021,
            classes: 200,
            max_tests: 5,
            max_statements: 6,
            keys: 3,
            values: 2,
            fixture_percent: 30,
            crash_weight: 4,
        }
    }
}

pub struct SimClassGenerator {
    params: GeneratorParams,
    rng: ChaCha8Rng,
}

impl SimClassGenerator {
    pub fn new(params: GeneratorParams) -> Self {
        assert!(
            params.max_tests >= 1 && params.max_tests <= ORACLE_TEST_LIMIT,
            "max_tests must be within 1..={ORACLE_TEST_LIMIT}"
        );
        assert!(params.keys >= 1 && params.values >= 1, "need at least one key and value");
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        Self { params, rng }
    }

    fn key(&mut self) -> String {
        format!("k{}", self.rng.random_range(0..self.params.keys))
    }

    fn value(&mut self) -> String {
        format!("v{}", self.rng.random_range(0..self.params.values))
    }

    fn statement(&mut self) -> SimStatement {
        let crash = self.params.crash_weight;
        let roll = self.rng.random_range(0..100 + crash);
        match roll {
            0..=34 => SimStatement::SetKey {
                key: self.key(),
                value: self.value(),
            },
            35..=44 => SimStatement::UnsetKey { key: self.key() },
            45..=74 => SimStatement::AssertEq {
                key: self.key(),
                expected: self.value(),
            },
            75..=89 => SimStatement::AssertUnset { key: self.key() },
            90..=99 => SimStatement::Noop,
            _ => SimStatement::Crash {
                message: "generated failure".into(),
            },
        }
    }

    fn fixture_statement(&mut self) -> SimStatement {
        match self.rng.random_range(0..3) {
            0 | 1 => SimStatement::SetKey {
                key: self.key(),
                value: self.value(),
            },
            _ => SimStatement::UnsetKey { key: self.key() },
        }
    }

    pub fn class(&mut self, name: impl Into<String>) -> SimClass {
        let tests = self.rng.random_range(1..=self.params.max_tests);
        let before_all = if self.rng.random_range(0..100) < self.params.fixture_percent {
            let n = self.rng.random_range(1..=2);
            (0..n).map(|_| self.fixture_statement()).collect()
        } else {
            Vec::new()
        };
        let tests = (0..tests)
            .map(|i| {
                let len = self.rng.random_range(0..=self.params.max_statements);
                SimTest::new(format!("t{i}"), (0..len).map(|_| self.statement()).collect())
            })
            .collect();
        SimClass {
            name: name.into(),
            before_all,
            tests,
        }
    }

    pub fn suite(&mut self, name: &str, module_path: &str) -> SimSuite {
        let classes = (0..self.params.classes).map(|i| self.class(format!("Gen{i:04}"))).collect();
        SimSuite {
            name: name.into(),
            module_path: module_path.into(),
            classes,
            generator: None,
        }
    }
}
