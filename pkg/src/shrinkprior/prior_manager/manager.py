import json
import os
import sys
from typing import Optional

from shrinkprior.modules.minimax import canonical_name, named_prior
from shrinkprior.modules.prior import PriorSpec
from shrinkprior.util import logger
from shrinkprior.util.errors import DomainError, ValidationError

if sys.version_info < (3, 9):
    # importlib.resources either doesn't exist or lacks the files()
    # function, so use the PyPI version:
    import importlib_resources
else:
    # importlib.resources has files(), so use that:
    import importlib.resources as importlib_resources

pkg = importlib_resources.files("shrinkprior")

NAMED_PREFIX = "named:"


class PriorManager:
    def __init__(self, catalog_path=None):
        source = catalog_path if catalog_path else pkg / "priors.json"
        try:
            logger.init("Prior Catalog", status="Loading")
            with open(source) as handle:
                self.priors = json.load(handle)
            logger.init_ok("Prior Catalog", status="OK")
        except (OSError, json.JSONDecodeError) as e:
            logger.init_err("Prior Catalog", status="Load Error")
            raise ValidationError(f"could not read prior catalog {source}: {e}") from e
        self._aliases = {canonical_name(name): name for name in self.priors}

    def get_prior(self, prior_name):
        return self.priors.get(self._aliases.get(canonical_name(prior_name), prior_name))

    def get_filtered_priors(self, **kwargs):
        """Get all catalog entries.
        Can filter based on metadata of the catalog
        """
        filtered_priors = self.priors
        for keyword in kwargs:
            iterating_priors = filtered_priors.copy()
            filtered_priors = {}
            for prior in iterating_priors:
                if iterating_priors[prior].get(keyword) == kwargs[keyword]:
                    filtered_priors[prior] = iterating_priors[prior]
        return filtered_priors

    def get_filtered_prior_names(self, **kwargs):
        filtered_priors = self.get_filtered_priors(**kwargs)
        return list(filtered_priors.keys())

    def resolve(self, prior_name, p: int) -> PriorSpec:
        entry = self.get_prior(prior_name)
        if entry is None:
            raise ValidationError(f"unknown named prior {prior_name!r}; known: {sorted(self.priors)}")
        if p < entry["min_p"]:
            raise DomainError(f"{entry['name']} needs p >= {entry['min_p']}, got p={p}")
        return named_prior(entry["name"], p)

    def load(self, source: str, p: Optional[int] = None) -> PriorSpec:
        """Resolve ``named:<name>``, a path to a JSON document, or an inline JSON object."""
        if source.startswith(NAMED_PREFIX):
            if p is None:
                raise ValidationError(f"{source} needs p")
            return self.resolve(source[len(NAMED_PREFIX):], p)
        if source.lstrip().startswith("{"):
            return PriorSpec.from_json(source, p=p)
        if os.path.isfile(source):
            try:
                with open(source) as handle:
                    text = handle.read()
            except UnicodeDecodeError as e:
                raise ValidationError(f"prior file {source} is not text: {e}") from e
            return PriorSpec.from_json(text, p=p)
        raise ValidationError(f"prior {source!r} is neither named:<name>, an existing file nor inline JSON")

    def save(self, spec: PriorSpec, path):
        with open(path, "w") as handle:
            handle.write(spec.to_json(indent=2))
        logger.debug(f"wrote prior spec to {path}")
