import pytest

from sleepcomb.cli import (
    EXIT_OK,
    EXIT_USAGE,
    RunConfig,
    ValidationError,
    create_argument_parser,
    run_cli,
)
from sleepcomb.logging import _cleanup_handlers


@pytest.fixture(autouse=True)
def isolated_cwd(temp_workspace, monkeypatch):
    """Run every CLI call from an empty directory with fresh log handlers."""
    monkeypatch.chdir(temp_workspace)
    yield temp_workspace
    _cleanup_handlers()


class TestArgumentParser:
    def test_verify_hard(self):
        args = create_argument_parser().parse_args(
            ["verify-hard", "--family", "min-cut", "--n", "3", "--literal-heaviness"]
        )
        run = RunConfig.from_args(args)
        assert run.command == "verify-hard"
        assert run.family == "min-cut"
        assert run.n == 3
        assert run.literal_heaviness

    def test_verify_extensible_defaults(self):
        args = create_argument_parser().parse_args(
            ["verify-extensible", "--family", "min-cut", "--paper-mincut-gadget"]
        )
        run = RunConfig.from_args(args)
        assert (run.n, run.p) == (1, 1)
        assert run.paper_mincut_gadget

    def test_per_action_inner_maps_to_learner(self):
        args = create_argument_parser().parse_args(
            ["reduce-per-action", "--family", "k-subsets", "--n", "1", "--T", "8", "--seed", "0"]
        )
        run = RunConfig.from_args(args)
        assert run.learner == "ftl"
        assert run.mode == "det"
        assert run.rounds == 8

    def test_reduce_disjunction_defaults(self):
        args = create_argument_parser().parse_args(
            ["reduce-disjunction", "--n", "3", "--T", "10", "--seed", "1"]
        )
        run = RunConfig.from_args(args)
        assert run.family == "k-subsets"
        assert run.learner == "hedge"
        assert run.adversary == "iid-realizable"


class TestRunConfigValidation:
    @pytest.mark.parametrize(
        "fields",
        [
            {"rounds": 0, "seed": 1},
            {"n": -1, "seed": 1},
            {"eta": 0.0, "seed": 1},
            {"seed": -3},
            {},
            {"seed": 1, "trials": 3},
        ],
    )
    def test_rejects(self, fields):
        with pytest.raises(ValidationError):
            RunConfig("run-game", **fields).validate()

    def test_deterministic_commands_need_no_seed(self):
        RunConfig("verify-hard", family="k-subsets", n=1).validate()

    def test_trials_with_output(self):
        RunConfig("run-game", seed=1, trials=3, out="out.csv").validate()


class TestExitCodes:
    def test_help(self):
        assert run_cli(["--help"]) == EXIT_OK

    def test_missing_command(self):
        assert run_cli([]) == EXIT_USAGE

    def test_unknown_family(self):
        assert run_cli(["verify-hard", "--family", "max-cut", "--n", "1"]) == EXIT_USAGE

    def test_zero_rounds(self):
        code = run_cli(["reduce-disjunction", "--n", "2", "--T", "0", "--seed", "1"])
        assert code == EXIT_USAGE

    def test_missing_seed(self):
        code = run_cli(["run-game", "--family", "k-subsets", "--n", "1", "--T", "5"])
        assert code == EXIT_USAGE

    def test_missing_config_file(self):
        code = run_cli(
            ["--config", "absent.yaml", "verify-hard", "--family", "k-subsets", "--n", "1"]
        )
        assert code == EXIT_USAGE

    def test_unknown_config_key(self, isolated_cwd):
        with open("sleepcomb.yaml", "w", encoding="utf-8") as f:
            f.write("include_patterns: ['*.py']\n")
        assert run_cli(["verify-hard", "--family", "k-subsets", "--n", "1"]) == EXIT_USAGE

    def test_graph_for_non_graph_family(self):
        code = run_cli(
            ["run-game", "--family", "k-subsets", "--graph", "g.txt", "--T", "5", "--seed", "0"]
        )
        assert code == EXIT_USAGE

    def test_missing_graph_file(self):
        code = run_cli(
            ["run-game", "--family", "min-cut", "--graph", "g.txt", "--T", "5", "--seed", "0"]
        )
        assert code == EXIT_USAGE

    def test_run_game_needs_size(self):
        code = run_cli(["run-game", "--family", "min-cut", "--T", "5", "--seed", "0"])
        assert code == EXIT_USAGE

    @pytest.mark.parametrize(
        "adversary", ["iid-noisy:0.7", "iid-noisy:lots", "adaptive", "file:missing.txt"]
    )
    def test_bad_adversary(self, adversary):
        code = run_cli(
            [
                "reduce-disjunction",
                "--n",
                "2",
                "--T",
                "10",
                "--seed",
                "0",
                "--adversary",
                adversary,
            ]
        )
        assert code == EXIT_USAGE

    def test_bad_target(self):
        code = run_cli(
            ["reduce-disjunction", "--n", "2", "--T", "10", "--seed", "0", "--target", "x5"]
        )
        assert code == EXIT_USAGE

    def test_generated_stream_needs_rounds(self):
        assert run_cli(["reduce-disjunction", "--n", "2", "--seed", "0"]) == EXIT_USAGE

    def test_bad_heaviness_request(self):
        assert run_cli(["verify-hard", "--family", "k-subsets", "--n", "0"]) == EXIT_USAGE
