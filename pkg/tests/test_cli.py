import hashlib
import os

import pytest

from afibdet.cli import main, parse_config_file

from conftest import FIXTURE_DIR


def run(args):
    return main(args)


def write_config(path, **kv):
    with open(path, "w") as f:
        for k, v in kv.items():
            f.write(f"{k} = {v}\n")
    return str(path)


def file_hash(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


@pytest.fixture
def fixture_config(tmp_path):
    return write_config(
        tmp_path / "cfg.txt",
        data_dir=FIXTURE_DIR,
        records="fix01",
        out_dir=str(tmp_path / "out"),
    )


@pytest.fixture
def synthetic_config(tmp_path):
    # tiny synthetic run so train/eval finish in seconds
    return write_config(
        tmp_path / "syn.txt",
        synthetic=24,
        conv_filters="2,2",
        fc_widths="8,4",
        batch_size=4,
        epochs=2,
        out_dir=str(tmp_path / "out"),
    )


class TestConfig:
    def test_parse_and_types(self, tmp_path):
        path = write_config(tmp_path / "c.txt", seed=5, ratio=0.6, records="a,b",
                            log_compress="false")
        values = parse_config_file(path)
        assert values == {"seed": 5, "ratio": 0.6, "records": "a,b", "log_compress": False}

    def test_comments_and_blanks(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("# comment\n\nseed = 3  # trailing\n")
        assert parse_config_file(str(path)) == {"seed": 3}

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path / "c.txt", bogus=1)
        with pytest.raises(SystemExit):
            parse_config_file(path)

    def test_flag_overrides_file(self, tmp_path, fixture_config, capsys):
        out2 = tmp_path / "other"
        assert run(["segment", "--config", fixture_config, "--out", str(out2)]) == 0
        assert (out2 / "manifest.csv").exists()

    def test_unknown_flag_is_error(self, fixture_config):
        with pytest.raises(SystemExit):
            run(["segment", "--config", fixture_config, "--bogus"])

    def test_help_available(self, capsys):
        for cmd in ("ingest", "segment", "spectrogram", "train", "eval", "report"):
            with pytest.raises(SystemExit) as exc:
                run([cmd, "--help"])
            assert exc.value.code == 0


class TestIngest:
    def test_fixture_summary(self, fixture_config, capsys):
        assert run(["ingest", "--config", fixture_config]) == 0
        out = capsys.readouterr().out
        assert "fix01: fs=250 Hz" in out
        assert "duration=0.00 h" in out  # 10 s record

    def test_missing_file_names_path(self, tmp_path, capsys):
        data = tmp_path / "data"
        data.mkdir()
        (data / "r1.hea").write_text("r1 1 250 2500\nr1.dat 212 200 12 0 0 0 0 ECG1\n")
        cfg = write_config(tmp_path / "c.txt", data_dir=str(data), records="r1")
        assert run(["ingest", "--config", cfg]) == 1
        err = capsys.readouterr().err
        assert "r1.dat" in err


class TestSegment:
    def test_manifest_and_counts(self, fixture_config, tmp_path, capsys):
        assert run(["segment", "--config", fixture_config]) == 0
        out = capsys.readouterr().out
        assert "windows: 5 total (3 AFIB)" in out
        manifest = tmp_path / "out" / "manifest.csv"
        lines = manifest.read_text().strip().split("\n")
        assert len(lines) == 6

    def test_hours_bookkeeping(self, fixture_config, capsys):
        run(["segment", "--config", fixture_config])
        out = capsys.readouterr().out
        # train+test hour figures are count*6/3600
        assert "train: 4 (0.01 h equivalent)" in out


class TestSpectrogram:
    def test_single_window(self, fixture_config, tmp_path, capsys):
        export = tmp_path / "imgs"
        assert run(["spectrogram", "--config", fixture_config,
                    "--window-id", "fix01:0", "--export", str(export)]) == 0
        files = os.listdir(export)
        assert files == ["fix01_0_NOT_AFIB.pgm"]
        data = open(export / files[0], "rb").read()
        assert data.startswith(b"P5\n128 64\n255\n")
        assert len(data) == len(b"P5\n128 64\n255\n") + 8192

    def test_all_windows(self, fixture_config, tmp_path):
        export = tmp_path / "imgs"
        assert run(["spectrogram", "--config", fixture_config, "--all",
                    "--export", str(export)]) == 0
        assert len(os.listdir(export)) == 5

    def test_unknown_window_id(self, fixture_config, capsys):
        assert run(["spectrogram", "--config", fixture_config,
                    "--window-id", "nope:0"]) == 1


class TestTrainEval:
    def test_train_then_eval(self, synthetic_config, tmp_path, capsys):
        assert run(["train", "--config", synthetic_config]) == 0
        out_dir = tmp_path / "out"
        assert (out_dir / "model.afcn").exists()
        epochs = (out_dir / "epochs.csv").read_text().strip().split("\n")
        assert epochs[0] == "epoch,mean_loss,train_accuracy"
        assert len(epochs) == 3

        assert run(["eval", "--config", synthetic_config,
                    str(out_dir / "model.afcn")]) == 0
        out = capsys.readouterr().out
        assert "accuracy:" in out
        metrics = (out_dir / "metrics.csv").read_text().strip().split("\n")
        assert len(metrics) == 2

    def test_zero_epoch_train_eval(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.txt", synthetic=12, conv_filters="2,2",
                           fc_widths="8,4", epochs=0, out_dir=str(tmp_path / "out"))
        assert run(["train", "--config", cfg]) == 0
        assert run(["eval", "--config", cfg, str(tmp_path / "out" / "model.afcn")]) == 0
        metrics = (tmp_path / "out" / "metrics.csv").read_text().strip().split("\n")
        assert len(metrics) == 2  # valid CSV even for an untrained model


class TestDeterminism:
    def test_segment_and_spectrogram_byte_identical(self, tmp_path):
        hashes = []
        for run_dir in ("a", "b"):
            out = tmp_path / run_dir
            cfg = write_config(tmp_path / f"{run_dir}.txt", data_dir=FIXTURE_DIR,
                               records="fix01", out_dir=str(out))
            assert run(["segment", "--config", cfg]) == 0
            assert run(["spectrogram", "--config", cfg, "--all",
                        "--export", str(out / "imgs")]) == 0
            digest = [file_hash(str(out / "manifest.csv"))]
            for name in sorted(os.listdir(out / "imgs")):
                digest.append(file_hash(str(out / "imgs" / name)))
            hashes.append(digest)
        assert hashes[0] == hashes[1]

    def test_train_checkpoint_byte_identical(self, tmp_path):
        hashes = []
        for run_dir in ("a", "b"):
            out = tmp_path / run_dir
            cfg = write_config(tmp_path / f"{run_dir}.txt", synthetic=16,
                               conv_filters="2,2", fc_widths="8,4", batch_size=4,
                               epochs=1, out_dir=str(out))
            assert run(["train", "--config", cfg]) == 0
            hashes.append(file_hash(str(out / "model.afcn")))
        assert hashes[0] == hashes[1]


class TestReport:
    def test_concatenate_and_summarize(self, tmp_path, capsys):
        from afibdet.training import ConfusionMatrix, EvalMetrics, metrics_csv_row, write_metrics_csv

        rows_a = [metrics_csv_row("r1", "convnet", 0,
                                  EvalMetrics.from_confusion(ConfusionMatrix(9, 1, 8, 2)))]
        rows_b = [metrics_csv_row("r2", "svm", f,
                                  EvalMetrics.from_confusion(ConfusionMatrix(7, 3, 9, 1)))
                  for f in range(2)]
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        write_metrics_csv(a, rows_a)
        write_metrics_csv(b, rows_b)
        assert run(["report", a, b]) == 0
        out = capsys.readouterr().out
        assert "# convnet:" in out
        assert "# svm:" in out
        assert out.count("\n") >= 5
