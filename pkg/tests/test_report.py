import numpy as np
import pytest

from conftest import make_rating, make_sample
from vlteval.calibrate import DAResult, human_overall_map, scale_human
from vlteval.corpus import Corpus, LanguageTierMap
from vlteval.report import (
    aggregate, export_distributions, language_tier_table, table1_average,
    write_distributions_csv, write_table_csv, write_table_json,
)
from vlteval.vectors import MetricVector

GPT4O_TABLE1_ROW = [18.55, 78.22, 67.60, 18.25, 87.33, 65.88, 28.56, 84.34, 80.65]
QWEN_VL_MAX_ROW = [21.72, 80.21, 69.42, 17.30, 87.29, 65.58, 30.07, 83.32, 79.22]


def result(id="a", system="sys", lang="en", tier="Low", dataset="d1",
           bleu=10.0, chrfpp=30.0, bsf1=70.0, comet=60.0, da=50.0, mean=42.5):
    return DAResult(
        id=id, system=system, lang=lang, tier=tier, dataset=dataset,
        vector=MetricVector(id, system, lang, bleu=bleu, chrfpp=chrfpp,
                            bsf1=bsf1, comet=comet),
        da_score=da, arithmetic_mean=mean, weights_renormalized=False,
    )


class TestAggregate:
    def test_single_result_row(self):
        table = aggregate([result()], "dataset")
        row = table.row("d1")
        assert row.count == 1
        assert row.metric_means["bleu"] == 10.0
        assert row.da_mean == 50.0

    def test_two_results_mean(self):
        table = aggregate([result(id="a", bleu=10.0), result(id="b", bleu=20.0)],
                          "dataset")
        assert table.row("d1").metric_means["bleu"] == pytest.approx(15.0)

    def test_randomized_fixture_against_summation_oracle(self):
        rng = np.random.default_rng(13)
        results = []
        for i in range(50):
            tier = ("Low", "Medium", "High")[i % 3]
            results.append(result(
                id=f"s{i}", tier=tier,
                bleu=float(rng.uniform(0, 100)), chrfpp=float(rng.uniform(0, 100)),
                bsf1=float(rng.uniform(0, 100)), comet=float(rng.uniform(0, 100)),
                da=float(rng.uniform(0, 100)), mean=float(rng.uniform(0, 100))))
        table = aggregate(results, "density_tier")
        for tier in ("Low", "Medium", "High"):
            members = [r for r in results if r.tier == tier]
            expected = sum(r.vector.bleu for r in members) / len(members)
            assert table.row(tier).metric_means["bleu"] == pytest.approx(expected, abs=1e-9)
            assert table.row(tier).count == len(members)

    def test_counts_partition_total(self):
        results = [result(id=f"s{i}", system=f"sys{i % 4}") for i in range(10)]
        table = aggregate(results, "system")
        assert sum(r.count for r in table.rows) == len(results)

    def test_groups_sorted(self):
        results = [result(id="a", dataset="zz"), result(id="b", dataset="aa")]
        table = aggregate(results, "dataset")
        assert [r.group for r in table.rows] == ["aa", "zz"]

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            aggregate([], "dataset")

    def test_pooled_mean_equals_weighted_group_means(self):
        rng = np.random.default_rng(17)
        results = [result(id=f"s{i}", dataset=f"d{i % 3}",
                          da=float(rng.uniform(0, 100))) for i in range(37)]
        table = aggregate(results, "dataset")
        pooled = sum(r.da_score for r in results) / len(results)
        weighted = sum(row.da_mean * row.count for row in table.rows) / len(results)
        assert pooled == pytest.approx(weighted, abs=1e-9)


class TestTable1Average:
    def test_published_rows(self):
        assert table1_average(GPT4O_TABLE1_ROW) == pytest.approx(58.82, abs=0.01)
        assert table1_average(QWEN_VL_MAX_ROW) == pytest.approx(59.35, abs=0.01)

    def test_constant_row(self):
        assert table1_average([7.5] * 9) == 7.5

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError):
            table1_average([1.0] * 8)

    def test_missing_value_rejected(self):
        with pytest.raises(ValueError, match="present"):
            table1_average([1.0] * 8 + [None])


class TestLanguageTierTable:
    TIERMAP = LanguageTierMap({"en": "High", "de": "Medium", "hi": "Low"})

    def test_english_only_single_high_row(self):
        table = language_tier_table([result(lang="en")], self.TIERMAP)
        assert [r.group for r in table.rows] == ["High"]

    def test_masking_effect_fixture(self):
        # High-tier scores strictly above Low-tier; pooled mean sits between
        results = ([result(id=f"h{i}", lang="en", da=80.0 + i) for i in range(5)]
                   + [result(id=f"l{i}", lang="hi", da=30.0 + i) for i in range(5)])
        table = language_tier_table(results, self.TIERMAP)
        high, low = table.row("High").da_mean, table.row("Low").da_mean
        pooled = sum(r.da_score for r in results) / len(results)
        assert high > low
        assert low < pooled < high

    def test_unmapped_language_named(self):
        with pytest.raises(KeyError, match="'xx'"):
            language_tier_table([result(lang="xx")], self.TIERMAP)

    def test_default_paper_tiermap_accepted(self):
        from vlteval.corpus import DEFAULT_LANGUAGE_TIERS
        tiermap = LanguageTierMap(DEFAULT_LANGUAGE_TIERS)
        assert tiermap.tier_of("en") == "High"
        assert tiermap.tier_of("ja") == "Medium"
        assert tiermap.tier_of("ar") == "Low"


class TestExportDistributions:
    def corpus(self):
        return Corpus(samples=(
            make_sample(id="a", human={"sys": {"en": make_rating(5, 5, 5, 5)}}),
            make_sample(id="b", human={"sys": {"en": make_rating(3, 3, 3, 3)}}),
            make_sample(id="c"),  # unrated
        ))

    def test_endpoints_and_midpoint(self):
        results = [result(id="a"), result(id="b"), result(id="c")]
        rows, skipped = export_distributions(results, human_overall_map(self.corpus()))
        assert skipped == 1
        by_id = {r["id"]: r for r in rows}
        assert by_id["a"]["human_scaled"] == 100.0
        assert by_id["b"]["human_scaled"] == 50.0

    def test_rows_match_direct_computation(self):
        samples, results = [], []
        for i in range(5):
            overall = 1.0 + i
            samples.append(make_sample(
                id=f"s{i}",
                human={"sys": {"en": make_rating(overall, overall, overall, overall)}}))
            results.append(result(id=f"s{i}", da=float(10 * i), mean=float(5 * i)))
        rows, skipped = export_distributions(
            results, human_overall_map(Corpus(samples=tuple(samples))))
        assert skipped == 0
        for i, row in enumerate(rows):
            assert row["human_scaled"] == scale_human(1.0 + i)
            assert row["da"] == 10.0 * i
            assert row["arithmetic_mean"] == 5.0 * i


class TestEmission:
    def test_csv_and_json_byte_stable(self, tmp_path):
        results = [result(id=f"s{i}", da=float(i)) for i in range(5)]
        table = aggregate(results, "dataset")
        paths = [tmp_path / f"t{i}.csv" for i in range(2)]
        for p in paths:
            write_table_csv(table, p, "provenance config=abc version=0.1.0")
        assert paths[0].read_bytes() == paths[1].read_bytes()
        jpaths = [tmp_path / f"t{i}.json" for i in range(2)]
        for p in jpaths:
            write_table_json(table, p, {"config_hash": "abc"})
        assert jpaths[0].read_bytes() == jpaths[1].read_bytes()

    def test_distribution_csv_footer(self, tmp_path):
        rows = [{"id": "a", "system": "s", "lang": "en",
                 "human_scaled": 75.0, "da": 70.0, "arithmetic_mean": 65.0}]
        path = tmp_path / "dist.csv"
        write_distributions_csv(rows, 3, path)
        text = path.read_text()
        assert text.strip().endswith("# skipped_unrated=3")

    def test_csv_two_decimal_display(self, tmp_path):
        table = aggregate([result(bleu=10.123456)], "dataset")
        path = tmp_path / "t.csv"
        write_table_csv(table, path)
        assert "10.12" in path.read_text()
