//! Built-in scenarios, one per subcommand.

use crate::cli::Command;

const CLASSICAL: &str = r#"
[oscillator]
chi = 1.0

[pulse]
g0 = 0.01
tau = 0.5

[state]
alpha_re = 6.0

[grid]
t_end = 3.5
dt_out = 0.002

[ensemble]
n_samples = 200000
snapshot_times = [0.1, 0.5, 1.0]
"#;

const QUANTUM: &str = r#"
[oscillator]
chi = 1.0

[pulse]
g0 = 0.01
tau = 0.3306939635357677

[state]
alpha_re = 6.0

[grid]
t_end = 6.283185307179586
dt_out = 0.002
"#;

const CAT: &str = r#"
[oscillator]
chi = 1.0

[pulse]
g0 = 0.01
tau = 0.27

[state]
kind = "cat"
alpha_re = 6.0
n_plus = 0.8944271909999159
n_minus = 0.4472135954999579
theta = 1.5707963267948966

[grid]
t_end = 3.141592653589793
dt_out = 0.002
"#;

const SWEEP: &str = r#"
[oscillator]
chi = 1.0

[pulse]
g0 = 0.01
tau = 0.27

[state]
kind = "cat"
alpha_re = 6.0
n_plus = 0.8944271909999159
n_minus = 0.4472135954999579
theta = 1.5707963267948966

[grid]
t_end = 1.5707963267948966
dt_out = 0.002

[sweep]
theta_points = 9
"#;

const LINDBLAD: &str = r#"
[oscillator]
chi = 1.0
gamma = 0.03
epsilon = 1.0

[pulse]
g0 = 0.03
tau = 0.27

[state]
kind = "cat"
alpha_re = 4.0
n_plus = 0.8944271909999159
n_minus = 0.4472135954999579
theta = 1.5707963267948966

[grid]
t_end = 1.8707963267948966
dt_out = 0.002
"#;

const REVIVAL: &str = r#"
[oscillator]
chi = 1.0

[state]
alpha_re = 3.0

[grid]
t_end = 6.283185307179586
dt_out = 0.01

[revival]
nu = [3, 5, 7, 23]
"#;

const ORACLE: &str = r#"
[oscillator]
chi = 1.0

[state]
alpha_re = 6.0

[grid]
t_end = 6.283185307179586
dt_out = 0.001

[ensemble]
n_samples = 20000
"#;

pub fn preset(command: Command) -> &'static str {
    match command {
        Command::ClassicalEnsemble => CLASSICAL,
        Command::QuantumEvolve => QUANTUM,
        Command::CatEvolve => CAT,
        Command::EchoSweep => SWEEP,
        Command::LindbladEvolve => LINDBLAD,
        Command::RevivalDecompose => REVIVAL,
        Command::OracleCheck => ORACLE,
    }
}
