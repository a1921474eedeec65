import argparse
import logging
import os
import sys
from dataclasses import dataclass, replace
from difflib import get_close_matches
from typing import Callable, Dict, List, Optional, Sequence

from dotenv import load_dotenv
from prompt_toolkit import print_formatted_text
from prompt_toolkit.formatted_text import HTML, to_plain_text
from prompt_toolkit.styles import Style

from src import messages
from src.energy import EnergyError, QuadratureConfig, energy_report, pointwise_all, pointwise_identity
from src.geometry import GeometryError
from src.helpers import format_value, parse_key_value, parse_vector, print_h_bar
from src.kernel import KernelError, jacobian_self_test, unit_ball_volume
from src.mesh_io import MeshIOError, load_mesh, report_to_dict, save_mesh, write_report
from src.occ import OccError, direction_sphere_integral, occ_check
from src.shape_manager import ShapeSpec, describe_parameters, generate_shape, list_shapes, load_shape_spec
from src.shapes import ShapeError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION_FAILED = 2

THREADS_ENV = "SURFID_THREADS"
LOG_LEVEL_ENV = "SURFID_LOG_LEVEL"

# errors that mean "bad input", not "bad mathematics"
INPUT_ERRORS = (
    GeometryError,
    ShapeError,
    KernelError,
    EnergyError,
    OccError,
    MeshIOError,
    ValueError,
    OSError,
)


class UsageError(Exception):
    """Raised for malformed command lines"""

    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Command:
    """Dataclass to represent a CLI command"""

    name: str
    description: str
    tips: List[str]
    handler: Callable[[argparse.Namespace], int]
    configure: Optional[Callable[[argparse.ArgumentParser], None]] = None
    aliases: List[str] = None

    def __post_init__(self):
        if self.aliases is None:
            self.aliases = []


class SurfaceIdentityCLI:
    def __init__(self):
        self.threads = 0
        self.style = Style.from_dict(
            {
                "success": "ansigreen bold",
                "warning": "ansiyellow",
                "error": "ansired bold",
                "value": "ansicyan",
            }
        )
        self._initialize_commands()
        self.parser = self._build_parser()

    def _initialize_commands(self) -> None:
        """Initialize all CLI commands"""
        self.commands: Dict[str, Command] = {}

        self._register_command(
            Command(
                name="help",
                description="Displays a list of all available commands, or help for a specific command.",
                tips=[
                    "Try 'help' to see available commands.",
                    "Try 'help {command}' to get more information about a specific command.",
                ],
                handler=self.help,
                configure=lambda p: p.add_argument("topic", nargs="?"),
                aliases=["h"],
            )
        )

        ################## MESHES ##################
        self._register_command(
            Command(
                name="generate",
                description="Generates a test shape and writes it as OFF (3D) or curve JSON (2D).",
                tips=[
                    "Format: generate --shape {kind} --resolution N -o FILE",
                    "Use --param key=value to override shape parameters",
                    "Use --spec shapes/{preset}.json to start from a preset",
                    f"Available kinds: {', '.join(list_shapes())}",
                ],
                handler=self.generate,
                configure=self._configure_generate,
                aliases=["gen"],
            )
        )

        ################## IDENTITY ##################
        self._register_command(
            Command(
                name="energy",
                description="Evaluates the signed and absolute energies and the convexity defect of a mesh.",
                tips=[
                    "Format: energy FILE [--eta 2.0] [--refine 2] [--report out.json]",
                    "signed_energy should match total_measure for closed oriented surfaces",
                    "convexity_defect is near 0 exactly for convex shapes",
                ],
                handler=self.energy,
                configure=self._configure_energy,
            )
        )
        self._register_command(
            Command(
                name="pointwise",
                description="Prints the pointwise identity value at one or every element centroid.",
                tips=["Format: pointwise FILE [--index i]", "Values target 2 in the plane and pi in space"],
                handler=self.pointwise,
                configure=self._configure_pointwise,
            )
        )

        ################## VERIFICATION ##################
        self._register_command(
            Command(
                name="occ",
                description="Samples random lines and checks that crossing signs cancel and alternate.",
                tips=["Format: occ FILE --lines 1000 --seed S [--report out.json]", "Exit code 2 means a violation was found"],
                handler=self.occ,
                configure=self._configure_occ,
            )
        )
        self._register_command(
            Command(
                name="jacobian-check",
                description="Compares the radial projection Jacobian formula with finite differences.",
                tips=["Format: jacobian-check --samples 1000 --seed S", "Exit code 2 means a sample exceeded the tolerance"],
                handler=self.jacobian_check,
                configure=self._configure_jacobian_check,
                aliases=["jacobian"],
            )
        )
        self._register_command(
            Command(
                name="sphere-integral",
                description="Monte-Carlo estimate of half the integral of |cos| over the unit sphere.",
                tips=["Format: sphere-integral --dim n --samples N --seed S", "The estimate converges to alpha_{n-1}"],
                handler=self.sphere_integral,
                configure=self._configure_sphere_integral,
            )
        )

    ###################
    # Helper Functions
    ###################
    def _register_command(self, command: Command) -> None:
        """Register a command and its aliases"""
        self.commands[command.name] = command
        for alias in command.aliases:
            self.commands[alias] = command

    def _build_parser(self) -> argparse.ArgumentParser:
        parser = _Parser(prog="surfid", description="Singular boundary-kernel identity toolkit")
        parser.add_argument("--threads", type=int, default=None, help="worker cap, 0 = auto")
        parser.add_argument("--quiet", action="store_true", help="only log warnings and errors")
        subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)
        for name, command in self.commands.items():
            if name != command.name:
                continue
            subparser = subparsers.add_parser(
                command.name, aliases=command.aliases, help=command.description
            )
            if command.configure:
                command.configure(subparser)
            subparser.set_defaults(handler=command.handler)
        return parser

    @staticmethod
    def _add_quadrature_flags(parser: argparse.ArgumentParser) -> None:
        defaults = QuadratureConfig()
        parser.add_argument("--eta", type=float, default=defaults.near_field_ratio)
        parser.add_argument("--refine", type=int, default=defaults.refinement_level)
        parser.add_argument("--exclude-adjacent", action="store_true")

    def _configure_generate(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--shape")
        parser.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
        parser.add_argument("--resolution", type=int)
        parser.add_argument("--spec")
        parser.add_argument("--center")
        parser.add_argument("-o", "--output", required=True)

    def _configure_energy(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file")
        self._add_quadrature_flags(parser)
        parser.add_argument("--report")
        parser.add_argument("--csv")

    def _configure_pointwise(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file")
        parser.add_argument("--index", type=int)
        self._add_quadrature_flags(parser)

    def _configure_occ(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file")
        parser.add_argument("--lines", type=int, default=1000)
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--report")

    def _configure_jacobian_check(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--samples", type=int, default=1000)
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--report")

    def _configure_sphere_integral(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--dim", type=int, default=3)
        parser.add_argument("--samples", type=int, default=1_000_000)
        parser.add_argument("--seed", type=int, default=0)

    def _configure_logging(self, quiet: bool) -> None:
        level = logging.WARNING if quiet else logging.INFO
        override = os.getenv(LOG_LEVEL_ENV)
        if override:
            if isinstance(logging.getLevelName(override.upper()), int):
                level = logging.getLevelName(override.upper())
            else:
                logger.warning(f"Ignoring invalid {LOG_LEVEL_ENV}={override!r}")
        logging.basicConfig(level=level, format="%(message)s", force=True)

    def _default_threads(self) -> int:
        raw = os.getenv(THREADS_ENV)
        if not raw:
            return 0
        try:
            threads = int(raw)
            if threads < 0:
                raise ValueError
            return threads
        except ValueError:
            logger.warning(f"Ignoring invalid {THREADS_ENV}={raw!r}")
            return 0

    def _command_token(self, argv: Sequence[str]) -> Optional[str]:
        """First token that is neither a global flag nor its value"""
        skip_next = False
        for token in argv:
            if skip_next:
                skip_next = False
            elif token == "--threads":
                skip_next = True
            elif not token.startswith("-"):
                return token
        return None

    def _get_command_suggestions(self, command: str, max_suggestions: int = 3) -> List[str]:
        """Get command suggestions based on string similarity"""
        return get_close_matches(command, self.commands.keys(), n=max_suggestions, cutoff=0.6)

    def _handle_unknown_command(self, command: str) -> None:
        """Handle unknown command with suggestions"""
        logger.warning(f"Unknown command: '{command}'")
        suggestions = self._get_command_suggestions(command)
        if suggestions:
            logger.info("Did you mean one of these?")
            for suggestion in suggestions:
                logger.info(f"  - {suggestion}")
        logger.info("Use 'help' to see all available commands.")

    def _emit(self, template: str, **values) -> None:
        """Print a verdict; styled on a terminal, plain text otherwise"""
        formatted = HTML(template.format(**values))
        if sys.stdout.isatty():
            print_formatted_text(formatted, style=self.style, file=sys.stdout)
        else:
            print(to_plain_text(formatted))

    def _print_values(self, values: Dict[str, object]) -> None:
        for name, value in values.items():
            print(messages.VALUE_LINE.format(name=name, value=format_value(value)))

    def _quadrature_config(self, args: argparse.Namespace) -> QuadratureConfig:
        return QuadratureConfig(
            near_field_ratio=args.eta,
            refinement_level=args.refine,
            exclude_adjacent=args.exclude_adjacent,
            threads=self.threads,
        )

    def _write_report(self, report, path: str, format: str = "json") -> None:
        write_report(report, path, format)
        logger.info(messages.REPORT_WRITTEN.format(path=path))

    def _show_command_help(self, command_name: str) -> int:
        """Show help for a specific command"""
        command = self.commands.get(command_name)
        if not command:
            self._handle_unknown_command(command_name)
            return EXIT_USAGE

        print(f"Help for '{command.name}':")
        print(f"Description: {command.description}")
        if command.aliases:
            print(f"Aliases: {', '.join(command.aliases)}")
        if command.tips:
            print("Tips:")
            for tip in command.tips:
                print(f"  - {tip}")
        if command.name == "generate":
            for kind in list_shapes():
                print(f"  {kind}:")
                for line in describe_parameters(kind):
                    print(f"      {line}")
        return EXIT_OK

    def _show_general_help(self) -> int:
        """Show general help information"""
        print("Available Commands:")
        print_h_bar()
        for name, command in sorted(self.commands.items()):
            if name == command.name:
                print(f"  {command.name:<16} - {command.description}")
        return EXIT_OK

    ###################
    # Command functions
    ###################
    def help(self, args: argparse.Namespace) -> int:
        """List all commands supported by the CLI"""
        if args.topic:
            return self._show_command_help(args.topic)
        return self._show_general_help()

    def generate(self, args: argparse.Namespace) -> int:
        if args.spec:
            spec = load_shape_spec(args.spec)
        elif args.shape:
            if args.resolution is None:
                raise UsageError("generate: --resolution is required without --spec")
            spec = ShapeSpec(kind=args.shape, resolution=args.resolution)
        else:
            raise UsageError("generate: one of --shape or --spec is required")

        overrides = {}
        if args.shape:
            overrides["kind"] = args.shape
        if args.resolution is not None:
            overrides["resolution"] = args.resolution
        if args.param:
            overrides["parameters"] = {**spec.parameters, **parse_key_value(args.param)}
        if args.center:
            overrides["center"] = parse_vector(args.center)
        spec = replace(spec, **overrides)

        mesh = generate_shape(spec)
        save_mesh(mesh, args.output)
        print(
            messages.GENERATED_MESH.format(
                kind=spec.kind, element_count=mesh.element_count, path=args.output
            )
        )
        return EXIT_OK

    def energy(self, args: argparse.Namespace) -> int:
        report = energy_report(load_mesh(args.file), self._quadrature_config(args))
        if not report.closed:
            self._emit(messages.OPEN_SURFACE_WARNING, boundary_edges=report.boundary_edges)
        elif not report.consistent:
            self._emit(messages.INCONSISTENT_ORIENTATION_WARNING)
        self._print_values(
            {
                "element_count": report.element_count,
                "total_measure": report.total_measure,
                "signed_energy": report.signed_energy,
                "absolute_energy": report.absolute_energy,
                "convexity_defect": report.convexity_defect,
                "pointwise_max_abs_error": report.pointwise_max_abs_error,
                "min_pair_kernel": report.min_pair_kernel,
                "near_pairs": report.near_pairs,
            }
        )
        if args.report:
            self._write_report(report, args.report)
        if args.csv:
            self._write_report(report, args.csv, "csv")
        return EXIT_OK

    def pointwise(self, args: argparse.Namespace) -> int:
        mesh = load_mesh(args.file)
        config = self._quadrature_config(args)
        if args.index is not None:
            value = pointwise_identity(mesh, args.index, config)
            print(messages.POINTWISE_LINE.format(index=args.index, value=format_value(value)))
            return EXIT_OK

        for index, value in enumerate(pointwise_all(mesh, config)):
            print(messages.POINTWISE_LINE.format(index=index, value=format_value(value)))
        return EXIT_OK

    def occ(self, args: argparse.Namespace) -> int:
        report = occ_check(load_mesh(args.file), args.lines, args.seed, threads=self.threads)
        # orientation verdict first, then the sampled statistics
        self._print_values(report_to_dict(report))
        if args.report:
            self._write_report(report, args.report)

        failed = (
            report.max_abs_sign_sum > 0
            or report.alternation_violations > 0
            or report.parity_violations > 0
        )
        if failed:
            self._emit(
                messages.OCC_FAILED,
                violating=report.violating_lines,
                alternation=report.alternation_violations,
                parity=report.parity_violations,
            )
            return EXIT_VERIFICATION_FAILED
        self._emit(messages.OCC_PASSED, lines=report.lines_tested)
        return EXIT_OK

    def jacobian_check(self, args: argparse.Namespace) -> int:
        report = jacobian_self_test(args.samples, args.seed)
        self._print_values(report_to_dict(report))
        if args.report:
            self._write_report(report, args.report)

        if report.failures:
            self._emit(messages.JACOBIAN_FAILED, failures=report.failures, tolerance=report.tolerance)
            return EXIT_VERIFICATION_FAILED
        self._emit(messages.JACOBIAN_PASSED, error=f"{report.max_relative_error:.3e}")
        return EXIT_OK

    def sphere_integral(self, args: argparse.Namespace) -> int:
        estimate = direction_sphere_integral(args.dim, args.samples, args.seed)
        target = unit_ball_volume(args.dim - 1)
        self._print_values(
            {
                "estimate": estimate,
                "target": target,
                "relative_error": abs(estimate - target) / target,
            }
        )
        return EXIT_OK

    ###################
    # Entry point
    ###################
    def run(self, argv: Sequence[str]) -> int:
        """Parse argv, dispatch one command and map failures onto exit codes"""
        load_dotenv()
        argv = list(argv)
        self._configure_logging("--quiet" in argv)

        command_token = self._command_token(argv)
        if command_token is None:
            self._show_general_help()
            return EXIT_USAGE
        if command_token not in self.commands:
            self._handle_unknown_command(command_token)
            return EXIT_USAGE

        try:
            args = self.parser.parse_args(argv)
            self.threads = self._default_threads() if args.threads is None else args.threads
            if self.threads < 0:
                raise UsageError(f"--threads must be >= 0, got {self.threads}")
            return args.handler(args)
        except UsageError as e:
            logger.error(str(e))
            logger.info(f"Use 'help {command_token}' for usage.")
            return EXIT_USAGE
        except INPUT_ERRORS as e:
            logger.error(f"Error executing {command_token}: {e}")
            return EXIT_USAGE
        except SystemExit as e:
            # argparse --help
            return EXIT_OK if not e.code else EXIT_USAGE
        except Exception as e:
            logger.exception(f"Unexpected error: {e}")
            return EXIT_USAGE


def main() -> None:
    sys.exit(SurfaceIdentityCLI().run(sys.argv[1:]))
