from django.core.validators import MaxValueValidator, MinValueValidator
from django.db import models


class ConvergenceRun(models.Model):
    ELEMENT_CHOICES = [
        ('vem31', 'VEM31 (k=2)'),
        ('vem32', 'VEM32 (k=3)'),
    ]
    MESH_CHOICES = [
        ('triangles', 'Uniform triangles'),
        ('voronoi', 'Random Voronoi'),
    ]

    element = models.CharField(max_length=10, choices=ELEMENT_CHOICES)
    mesh_type = models.CharField(max_length=20, choices=MESH_CHOICES)
    sizes = models.CharField(max_length=200, help_text="Comma separated N or cell counts")
    nu = models.FloatField(validators=[MinValueValidator(0.0), MaxValueValidator(0.5)])
    bending_rigidity = models.FloatField(validators=[MinValueValidator(0.0)])
    seed = models.IntegerField(default=0)
    lloyd_iters = models.PositiveIntegerField(default=0)
    deterministic = models.BooleanField(default=False)
    interpolant = models.BooleanField(default=False, help_text="Errors of the interpolant, no solve")

    # least-squares slopes against the mean cell diameter
    slope_l2 = models.FloatField(null=True, blank=True)
    slope_h1 = models.FloatField(null=True, blank=True)
    slope_h2 = models.FloatField(null=True, blank=True)

    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return f"{self.get_element_display()} on {self.mesh_type} [{self.sizes}]"

    @property
    def size_list(self):
        return [int(s) for s in self.sizes.split(',') if s]

    class Meta:
        verbose_name = 'Convergence run'
        verbose_name_plural = 'Convergence runs'
        ordering = ['-created_at']


class ErrorRecord(models.Model):
    run = models.ForeignKey(ConvergenceRun, on_delete=models.CASCADE, related_name='rows')
    position = models.PositiveIntegerField()
    h = models.FloatField()
    h_mean = models.FloatField()
    n_dofs = models.PositiveIntegerField()
    rel_l2 = models.FloatField()
    rel_h1 = models.FloatField()
    rel_h2 = models.FloatField()
    residual = models.FloatField(default=0.0)

    def __str__(self):
        return f"h={self.h:.4f} in run {self.run_id}"

    class Meta:
        ordering = ['run', 'position']
        unique_together = ('run', 'position')
